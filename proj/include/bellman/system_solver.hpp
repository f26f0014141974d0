#pragma once

#include "bellman/exponents.hpp"
#include "bellman/special_functions.hpp"

namespace bellman {

/// Solved pair (gamma, Y) of the coupled equations
///   kappa(Y)/kappa(gamma)     = Z/|zeta|^p,
///   delta_fn(Y)/delta_fn(gamma) = (|eta|^q Z / (|zeta|^p H))^(1/q),
/// together with the absolute substitution residuals of both equations in
/// cross-multiplied form.
struct GammaYSolution {
    double gamma = 0.0;
    double Y = 0.0;
    double residual_eq1 = 0.0;
    double residual_eq2 = 0.0;
    int iterations = 0;
};

/// Unique G > Y with delta_fn(Y) = r * delta_fn(G), for Y > 0 and r in (0,1).
/// Bracketed bisection with bracket expansion; delta_fn is increasing and
/// unbounded so the bracket always exists.
double solve_G(double Y, double r, const ExponentPair& e, int max_iterations = 200);

/// Constructive solution on the second-branch region
/// (|eta|^q Z < |zeta|^p H, both budgets strict). The eta = 0 shortcut sets
/// Y = 0 and roots kappa(gamma) = |zeta|^p/Z; otherwise
/// Fhat(Y) = kappa(Y) - (Z/|zeta|^p) kappa(G(Y)) is rooted by bisection on
/// (0, Y_max) where G(Y_max) = 1/(p-1). Fhat is negative near 0 and positive
/// near Y_max; a violated sign condition raises with both endpoint values.
GammaYSolution solve_system(const ScalarParams& s, const ExponentPair& e);

/// Brute-force minimizer of w_objective over the closed triangle
/// {0 <= Y <= gamma <= 1/(p-1)}: uniform grid_n x grid_n sweep plus
/// refine_rounds local refinements, each shrinking the window 10x around the
/// incumbent. Test oracle only; residual fields report the substitution
/// residuals of the incumbent, iterations the number of evaluations.
GammaYSolution minimize_L_grid(const ScalarParams& s, const ExponentPair& e, int grid_n,
                               int refine_rounds);

} // namespace bellman
