#pragma once

#include <optional>

#include <Eigen/Dense>

#include "bellman/exponents.hpp"

namespace bellman {

// Scalar building blocks of the evaluator. All functions here require
// 1 < p <= 2; callers working at p > 2 swap through the conjugate pair
// first. Everything is pure and safe for concurrent use.

/// kappa(t) = (1 - (p-1) t) (1 + t)^(p-1).
/// Strictly decreasing on [0, inf) with kappa(0) = 1, kappa(1/(p-1)) = 0.
double kappa(double t, const ExponentPair& e);

/// delta_fn(t) = t (1 + t)^(p-2). Strictly increasing, concave, unbounded.
double delta_fn(double t, const ExponentPair& e);

/// C(gamma) = ((2-p) gamma^(p-1) + gamma^(p-2)) / (p-1).
/// Strictly decreasing on (0, 1/(p-1)]; C(1/(p-1)) = (p-1)^{-p}.
double cost_constant(double gamma, const ExponentPair& e);

/// Two-branch special function on magnitudes:
///   |y| <  gamma |x|:  (gamma/(gamma+1))^(p-2) (|x|+|y|)^(p-1) (|y| - |x|/(p-1))
///   |y| >= gamma |x|:  |y|^p - C(gamma) |x|^p
/// The branches agree on |y| = gamma |x|; the closed set takes the tie.
double b_special(double x_norm, double y_norm, double gamma, const ExponentPair& e);

/// Vector form; depends on x, y only through their norms.
double b_special(const Eigen::Ref<const Eigen::VectorXd>& x,
                 const Eigen::Ref<const Eigen::VectorXd>& y, double gamma,
                 const ExponentPair& e);

/// Objective of the normalized two-variable minimization,
///   w(gamma, Y) = -Y |eta| + H^(1/q) ( b(1, Y; gamma) + C(gamma) Z / |zeta|^p )^(1/p),
/// defined for gamma in (0, 1/(p-1)], Y >= 0. For Y <= gamma this is the
/// restricted objective whose interior minimizer solves the two-equation
/// system. Returns nullopt when the radicand is negative (infeasible
/// evaluation point).
std::optional<double> w_objective(double gamma, double Y, const ScalarParams& s,
                                  const ExponentPair& e);

/// Ridge objective at gamma = 1/(p-1):
///   F(Y) = -Y |eta| + H^(1/q) ( Y^p + (p-1)^{-p} (Z/|zeta|^p - 1) )^(1/p).
double f_univariate(double Y, const ScalarParams& s, const ExponentPair& e);

/// Stationary point of f_univariate:
///   Y* = (p-1)^{-1} ( (Z - |zeta|^p)/(H - |eta|^q) * |eta|^q/|zeta|^p )^(1/p).
double f_univariate_argmin(const ScalarParams& s, const ExponentPair& e);

namespace detail {
/// pow with the base floored at 1e-300, for negative exponents on bases
/// that can underflow to zero.
inline double guarded_pow(double base, double expo) {
    return std::pow(base < 1e-300 ? 1e-300 : base, expo);
}
} // namespace detail

} // namespace bellman
