#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "bellman/exponents.hpp"
#include "bellman/system_solver.hpp"

namespace bellman {

/// A point (zeta, eta, Z, H) of the domain Z >= |zeta|^p, H >= |eta|^q.
struct BellmanPoint {
    Eigen::VectorXd zeta;
    Eigen::VectorXd eta;
    double Z = 0.0;
    double H = 0.0;

    BellmanPoint() = default;
    BellmanPoint(Eigen::VectorXd zeta_, Eigen::VectorXd eta_, double Z_, double H_)
        : zeta(std::move(zeta_)), eta(std::move(eta_)), Z(Z_), H(H_) {}

    /// Scalar 1-d convenience constructor.
    BellmanPoint(double zeta_, double eta_, double Z_, double H_)
        : zeta(Eigen::VectorXd::Constant(1, zeta_)), eta(Eigen::VectorXd::Constant(1, eta_)),
          Z(Z_), H(H_) {}

    ScalarParams scalars() const { return ScalarParams{zeta.norm(), eta.norm(), Z, H}; }

    bool valid_shape() const { return zeta.size() >= 1 && zeta.size() == eta.size(); }
};

enum class Branch { FirstBranch, SecondBranch, Boundary, DualSwapped };

std::string branch_name(Branch b);

struct BellmanResult {
    double value = 0.0;
    Branch branch = Branch::Boundary;
    std::optional<double> gamma;
    std::optional<double> Y;
    std::optional<double> residual_eq1;
    std::optional<double> residual_eq2;
};

/// Relative tolerances fixed across the evaluator: a point counts as
/// boundary when Z <= |zeta|^p (1 + 1e-12) (or the H analogue), and the
/// near-interface band |eta|^q Z >= |zeta|^p H (1 - 1e-10) routes to the
/// first branch, where the two formulas agree and the system is
/// ill-conditioned.
inline constexpr double kBoundaryTol = 1e-12;
inline constexpr double kInterfaceTol = 1e-10;

/// Branch of the defining formula at pt, for 1 < p <= 2.
/// Boundary when Z = |zeta|^p or H = |eta|^q (value 0 there);
/// FirstBranch when |eta|^q Z >= |zeta|^p H, else SecondBranch.
Branch classify_branch(const BellmanPoint& pt, const ExponentPair& e);

/// The function value on the full domain, all 1 < p < infinity.
///   first branch:  (H - |eta|^q)^(1/q) (Z - |zeta|^p)^(1/p) / (p - 1)
///   second branch: gamma Z^(1/p) H^(1/q) - |zeta||eta| Y,  (gamma, Y) solved
///   p > 2:         evaluate the conjugate pair at (eta, zeta, H, Z)
BellmanResult eval_bellman(const BellmanPoint& pt, const ExponentPair& e);

/// Closed form sqrt((Z - |zeta|^2)(H - |eta|^2)) at p = 2. Test oracle for
/// eval_bellman.
double eval_bellman_p2_closed(const BellmanPoint& pt);

/// Integrand of the dual upper bound:
///   -s |eta| + H^(1/q) ( b(|zeta|, s; gamma) + C(gamma) Z )^(1/p),
/// an upper bound on the function value for every (gamma, s); the infimum
/// over gamma in (0, 1/(p-1)], s >= 0 attains it. nullopt on a negative
/// radicand.
std::optional<double> infimum_objective(double gamma, double s_var, const ScalarParams& s,
                                        const ExponentPair& e);

/// Direct numerical minimization of infimum_objective by grid search with
/// refine_rounds 10x window refinements. Independent of the solver path;
/// requires a strict interior point and 1 < p <= 2.
double eval_via_infimum(const BellmanPoint& pt, const ExponentPair& e, int grid_n,
                        int refine_rounds);

} // namespace bellman
