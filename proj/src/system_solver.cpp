#include "bellman/system_solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bellman {

namespace {

// Machine-precision bisection: halve until the midpoint hits an endpoint
// (or the iteration cap). Requires f(lo) <= 0 <= f(hi) or the reverse.
template <class F>
double bisect_to_machine(F&& f, double lo, double hi, int max_iterations, int* iterations_out) {
    double flo = f(lo);
    int it = 0;
    for (; it < max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if ((flo <= 0.0 && fm <= 0.0) || (flo >= 0.0 && fm >= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if (iterations_out) *iterations_out += it;
    return 0.5 * (lo + hi);
}

} // namespace

double solve_G(double Y, double r, const ExponentPair& e, int max_iterations) {
    if (!(Y > 0.0)) throw std::invalid_argument("solve_G: Y must be > 0");
    if (!(r > 0.0) || !(r < 1.0)) throw std::invalid_argument("solve_G: r must be in (0,1)");
    const double target = delta_fn(Y, e) / r;
    double hi = std::max(Y, 1.0);
    int expansions = 0;
    while (delta_fn(hi, e) < target) {
        hi *= 2.0;
        if (++expansions > 2000) {
            throw std::runtime_error("solve_G: bracket expansion failed");
        }
    }
    int iters = 0;
    const double g =
        bisect_to_machine([&](double t) { return delta_fn(t, e) - target; }, Y, hi,
                          max_iterations, &iters);
    if (iters >= max_iterations) {
        std::ostringstream msg;
        msg << "solve_G: no convergence after " << max_iterations << " iterations (Y=" << Y
            << ", r=" << r << ")";
        throw std::runtime_error(msg.str());
    }
    return g;
}

GammaYSolution solve_system(const ScalarParams& s, const ExponentPair& e) {
    if (!(e.p > 1.0) || !(e.p <= 2.0)) {
        throw std::invalid_argument("solve_system: requires 1 < p <= 2");
    }
    const double zp = std::pow(s.zeta_norm, e.p);
    const double hq = std::pow(s.eta_norm, e.q);
    if (!(s.Z > zp) || !(s.H > hq)) {
        throw std::invalid_argument("solve_system: requires Z > |zeta|^p and H > |eta|^q");
    }
    if (!(hq * s.Z < zp * s.H)) {
        throw std::invalid_argument("solve_system: requires |eta|^q Z < |zeta|^p H");
    }

    GammaYSolution sol;
    const double ratio = s.Z / zp;
    const double gmax = e.gamma_max();
    const double r =
        s.eta_norm == 0.0 ? 0.0 : std::pow(hq * s.Z / (zp * s.H), 1.0 / e.q);

    if (r == 0.0) {
        // eta = 0 (or |eta|^q underflowed): the second equation forces Y = 0
        // and the first becomes kappa(gamma) = |zeta|^p / Z.
        sol.Y = 0.0;
        sol.gamma = bisect_to_machine([&](double g) { return kappa(g, e) - 1.0 / ratio; },
                                      1e-300, gmax, 200, &sol.iterations);
        sol.residual_eq1 = std::abs(kappa(0.0, e) - ratio * kappa(sol.gamma, e));
        sol.residual_eq2 = 0.0;
        return sol;
    }
    const double y_max =
        bisect_to_machine([&](double t) { return delta_fn(t, e) - r * delta_fn(gmax, e); }, 0.0,
                          gmax, 200, &sol.iterations);

    const auto fhat = [&](double Y) { return kappa(Y, e) - ratio * kappa(solve_G(Y, r, e), e); };
    const double lo = 1e-12 * y_max;
    const double hi = y_max * (1.0 - 1e-12);
    const double f_lo = fhat(lo);
    const double f_hi = fhat(hi);
    if (!(f_lo < 0.0) || !(f_hi > 0.0)) {
        std::ostringstream msg;
        msg << "solve_system: bracket sign condition violated, Fhat(" << lo << ")=" << f_lo
            << ", Fhat(" << hi << ")=" << f_hi;
        throw std::runtime_error(msg.str());
    }
    sol.Y = bisect_to_machine(fhat, lo, hi, 200, &sol.iterations);
    sol.gamma = solve_G(sol.Y, r, e);
    sol.residual_eq1 = std::abs(kappa(sol.Y, e) - ratio * kappa(sol.gamma, e));
    sol.residual_eq2 = std::abs(delta_fn(sol.Y, e) - r * delta_fn(sol.gamma, e));
    return sol;
}

GammaYSolution minimize_L_grid(const ScalarParams& s, const ExponentPair& e, int grid_n,
                               int refine_rounds) {
    if (grid_n < 2 || refine_rounds < 0) {
        throw std::invalid_argument("minimize_L_grid: grid_n >= 2, refine_rounds >= 0");
    }
    const double zp = std::pow(s.zeta_norm, e.p);
    const double hq = std::pow(s.eta_norm, e.q);
    if (!(s.zeta_norm > 0.0) || !(s.Z > zp) || !(s.H > hq)) {
        throw std::invalid_argument("minimize_L_grid: requires interior point with |zeta| > 0");
    }
    const double gmax = e.gamma_max();

    double best_val = std::numeric_limits<double>::infinity();
    double best_g = gmax;
    double best_y = 0.0;
    int evals = 0;

    double g_lo = 0.0, g_hi = gmax, y_lo = 0.0, y_hi = gmax;
    for (int round = 0; round <= refine_rounds; ++round) {
        for (int i = 0; i < grid_n; ++i) {
            const double g = g_lo + (g_hi - g_lo) * (i + 1) / grid_n;
            if (!(g > 0.0) || g > gmax) continue;
            for (int j = 0; j < grid_n; ++j) {
                const double y = y_lo + (y_hi - y_lo) * j / (grid_n - 1);
                if (y < 0.0 || y > g) continue;
                const auto v = w_objective(g, y, s, e);
                ++evals;
                if (v && *v < best_val) {
                    best_val = *v;
                    best_g = g;
                    best_y = y;
                }
            }
        }
        const double g_w = (g_hi - g_lo) / 10.0;
        const double y_w = (y_hi - y_lo) / 10.0;
        g_lo = std::max(0.0, best_g - 0.5 * g_w);
        g_hi = std::min(gmax, best_g + 0.5 * g_w);
        y_lo = std::max(0.0, best_y - 0.5 * y_w);
        y_hi = std::min(gmax, best_y + 0.5 * y_w);
    }

    GammaYSolution sol;
    sol.gamma = best_g;
    sol.Y = best_y;
    sol.iterations = evals;
    sol.residual_eq1 = std::abs(kappa(sol.Y, e) - (s.Z / zp) * kappa(sol.gamma, e));
    const double r = std::pow(hq * s.Z / (zp * s.H), 1.0 / e.q);
    sol.residual_eq2 = std::abs(delta_fn(sol.Y, e) - r * delta_fn(sol.gamma, e));
    return sol;
}

} // namespace bellman
