#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bellman/evaluator.hpp"
#include "bellman/exponents.hpp"
#include "bellman/random.hpp"

namespace bellman {

/// Finite adapted tree carrying a pair (f, g) of vector-valued processes.
/// Each node stores its value pair and the transition probability from its
/// parent; children probabilities sum to 1, probability-weighted child
/// values reproduce the parent (martingale property), and every edge
/// satisfies |dg| <= |df| (differential subordination).
struct TreeNode {
    Eigen::VectorXd f_value;
    Eigen::VectorXd g_value;
    double probability = 1.0; // conditional on the parent
    std::vector<TreeNode> children;
};

struct MartingaleTree {
    TreeNode root;
    int depth = 0;
    int dimension = 1;
};

/// Tolerances of the tree invariants.
inline constexpr double kTreeProbTol = 1e-12;
inline constexpr double kTreeMeanTol = 1e-10;
inline constexpr double kTreeSubordTol = 1e-12;

/// True iff all three structural invariants hold everywhere.
bool tree_is_valid(const MartingaleTree& t);

/// Random differentially-subordinate pair (test-input generator).
/// Children f-increments are drawn and projected to conditional mean zero;
/// g-increments are per-child contracted rotations of the f-increments,
/// projected to conditional mean zero and uniformly rescaled if the
/// projection broke |dg| <= |df|. Deterministic per seed.
MartingaleTree random_ds_pair(std::uint64_t seed, int depth, int branching, int dim);

/// Exact probability-weighted terminal moments (E|f_n|^p, E|g_n|^p).
std::pair<double, double> tree_terminal_moments(const MartingaleTree& t, double p);

/// Slack of the subordination bound at terminal depth:
///   C(gamma) E|f_n|^p + b(f_0, g_0; gamma) - E|g_n|^p
/// computed from exact leaf expectations. Nonnegative up to rounding for
/// every valid tree, 1 < p < 2, gamma in (0, 1/(p-1)].
double verify_subordination_bound(const MartingaleTree& t, double gamma, const ExponentPair& e);

/// Parameters of the extremal Markov pair: a positive step delta, the
/// absorption slope gamma in (0, 1/(p-1)), the start ordinate Y >= 0, and
/// the first-step offset eps (zero for the in-cone start).
struct ChainParams {
    double p = 1.5;
    double gamma = 0.5;
    double Y = 0.0;
    double delta = 1e-3;
    double eps = 0.0;
};

struct ChainAtom {
    double f_value = 0.0;
    double mass = 0.0;
};

/// Exact terminal statistics of the chain. Moments come from closed
/// geometric sums; the materialized atom list is truncated once its
/// cumulative mass reaches 1 - 1e-14, with the remainder assigned to the
/// final atom.
struct ChainStats {
    std::vector<ChainAtom> atoms;
    double tail_ratio = 0.0;      // per-cycle continuation probability
    double ef_p = 0.0;            // E |f_inf|^p
    double eg_p = 0.0;            // E |g_inf|^p
    double eg_signed_power = 0.0; // E g_inf |g_inf|^(p-2)
    double ef_mean = 0.0;         // E f_inf (must be 1)
};

/// Chain started at (1, Y) with 0 <= Y < gamma (eps must be 0). Terminal
/// values sit on |g| = gamma f; the f-distribution is the geometric family
/// of atoms (1+Y)/(gamma+1) (1+2 delta)^k.
ChainStats extremal_chain_case2(const ChainParams& cp);

/// Modified chain: first step from (1, Y) to (1-eps, Y+eps) (absorbing) or
/// to (1+Y, 0), then the case-2 rules. Requires eps > 0; Y >= 1/(p-1) is
/// permitted. Statistics are the two-branch mixture with the sub-chain
/// scaled by (1+Y).
ChainStats extremal_chain_case1(const ChainParams& cp);

/// First-step offset of the modified chain,
///   eps = (1 - (p-1) gamma) Y (1+gamma)^(p-1) / (1+Y)^p (Zratio - 1),
/// where Zratio = Zbar/|zeta|^p.
double case1_epsilon(double gamma, double Y, double z_ratio, const ExponentPair& e);

/// Value of the supremum functional attained by the extremal pair targeting
/// the shrunk budgets Zbar = |zeta|^p + shrink (Z - |zeta|^p),
/// Hbar = |eta|^q + shrink (H - |eta|^q). The case is selected by
/// |eta|^q Zbar vs |zeta|^p Hbar; the in-cone case takes (gamma, Y) from
/// solve_system, the other case takes Y from the ridge minimizer with
/// gamma = (1 - 10 delta)/(p-1).
double lower_bound_value(const BellmanPoint& pt, const ExponentPair& e, double delta,
                         double shrink);

/// Monte-Carlo estimates with standard errors, as a cross-check of the
/// exact chain statistics.
struct McChainStats {
    double ef_p = 0.0, ef_p_se = 0.0;
    double eg_p = 0.0, eg_p_se = 0.0;
    double eg_signed_power = 0.0, eg_signed_power_se = 0.0;
    double ef_mean = 0.0, ef_mean_se = 0.0;
    double eg_mean = 0.0, eg_mean_se = 0.0;
    long long capped_paths = 0;
    long long n_paths = 0;
};

/// Path simulation of the chain (both variants, selected by eps > 0).
/// Branch probabilities follow from the martingale property; a path-length
/// cap guards non-termination and capped paths are counted.
McChainStats simulate_chain_mc(const ChainParams& cp, long long n_paths, std::uint64_t seed,
                               long long step_cap = 1000000);

/// L^p-norm ratio || sum_k eps_k a_k h_k || / || sum_k a_k h_k || for the
/// standard Haar enumeration (h_0 the constant, then dyadic levels left to
/// right), computed exactly on the dyadic grid. Bounded by p* - 1.
double verify_haar_unconditionality(const std::vector<Eigen::VectorXd>& coeffs,
                                    const std::vector<int>& signs, const ExponentPair& e);

} // namespace bellman
