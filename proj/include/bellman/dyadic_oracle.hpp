#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "bellman/evaluator.hpp"
#include "bellman/exponents.hpp"

namespace bellman {

/// A pair of vector-valued step functions on the 2^depth finest dyadic
/// cells of [0, 1), stored column-per-cell.
struct DyadicFunctionPair {
    int depth = 0;
    Eigen::MatrixXd phi_leaves; // dim x 2^depth
    Eigen::MatrixXd psi_leaves; // dim x 2^depth

    int dim() const { return static_cast<int>(phi_leaves.rows()); }
    int leaves() const { return static_cast<int>(phi_leaves.cols()); }
};

/// The supremum functional on the dyadic tree:
///   (1/4) sum over internal nodes I of |phi_{I+} - phi_{I-}| |psi_{I-} - psi_{I+}| |I|
/// with node averages formed bottom-up by pairwise means and |I| = 2^{-level}.
double objective(const DyadicFunctionPair& dp);

/// Nearest feasible pair for the constraint set
///   mean(phi) = zeta,  mean(|phi|^p) <= Z,  mean(psi) = eta,  mean(|psi|^q) <= H.
/// A pair already satisfying all four constraints (1e-10 tolerance) is
/// returned unchanged. Otherwise the means are shifted exactly onto the
/// targets and the deviations are contracted by the largest factor in [0,1]
/// restoring the moment budgets (bisection on the scalar moment function).
DyadicFunctionPair feasible_project(const DyadicFunctionPair& dp, const BellmanPoint& pt,
                                    const ExponentPair& e);

struct MaximizeResult {
    double value = 0.0;
    DyadicFunctionPair pair;
};

/// Projected gradient ascent with random feasible restarts: central-difference
/// leaf gradients, backtracking line search, projection after every step,
/// stop on relative improvement < 1e-9 or max_iterations. Every returned
/// value is a certified lower bound because the returned pair is feasible.
/// An optional warm start joins the restart pool (used to embed a shallower
/// optimum into a deeper run by leaf splitting).
MaximizeResult maximize(const BellmanPoint& pt, const ExponentPair& e, int depth, int restarts,
                        std::uint64_t seed, int max_iterations = 500,
                        const DyadicFunctionPair* warm_start = nullptr);

/// Each leaf duplicated 2^(extra_depth) times; the step function (and hence
/// the objective and all constraints) is unchanged.
DyadicFunctionPair split_leaves(const DyadicFunctionPair& dp, int extra_depth);

} // namespace bellman
