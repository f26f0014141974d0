#include "bellman/evaluator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bellman/special_functions.hpp"

namespace bellman {

namespace {

void require_point(const BellmanPoint& pt, const ExponentPair& e) {
    if (!pt.valid_shape()) {
        throw std::invalid_argument("BellmanPoint: zeta, eta must have equal dimension >= 1");
    }
    if (!pt.scalars().in_domain(e)) {
        throw std::invalid_argument("BellmanPoint: outside domain (Z >= |zeta|^p, H >= |eta|^q)");
    }
}

bool is_boundary(const ScalarParams& s, const ExponentPair& e) {
    return s.Z <= std::pow(s.zeta_norm, e.p) * (1.0 + kBoundaryTol) ||
           s.H <= std::pow(s.eta_norm, e.q) * (1.0 + kBoundaryTol);
}

} // namespace

std::string branch_name(Branch b) {
    switch (b) {
        case Branch::FirstBranch: return "FirstBranch";
        case Branch::SecondBranch: return "SecondBranch";
        case Branch::Boundary: return "Boundary";
        case Branch::DualSwapped: return "DualSwapped";
    }
    return "?";
}

Branch classify_branch(const BellmanPoint& pt, const ExponentPair& e) {
    if (!(e.p > 1.0) || !(e.p <= 2.0)) {
        throw std::invalid_argument("classify_branch: requires 1 < p <= 2");
    }
    require_point(pt, e);
    const ScalarParams s = pt.scalars();
    if (is_boundary(s, e)) return Branch::Boundary;
    const double lhs = std::pow(s.eta_norm, e.q) * s.Z;
    const double rhs = std::pow(s.zeta_norm, e.p) * s.H;
    return lhs >= rhs * (1.0 - kInterfaceTol) ? Branch::FirstBranch : Branch::SecondBranch;
}

BellmanResult eval_bellman(const BellmanPoint& pt, const ExponentPair& e) {
    require_point(pt, e);
    if (e.p > 2.0) {
        const BellmanPoint swapped(pt.eta, pt.zeta, pt.H, pt.Z);
        BellmanResult res = eval_bellman(swapped, e.conjugate());
        res.branch = Branch::DualSwapped;
        return res;
    }

    const ScalarParams s = pt.scalars();
    BellmanResult res;
    const Branch br = classify_branch(pt, e);
    res.branch = br;
    if (br == Branch::Boundary) {
        res.value = 0.0;
        return res;
    }
    const double zp = std::pow(s.zeta_norm, e.p);
    const double hq = std::pow(s.eta_norm, e.q);
    if (br == Branch::FirstBranch) {
        res.value = std::pow(s.H - hq, 1.0 / e.q) * std::pow(s.Z - zp, 1.0 / e.p) / (e.p - 1.0);
        return res;
    }
    const GammaYSolution sol = solve_system(s, e);
    res.value = sol.gamma * std::pow(s.Z, 1.0 / e.p) * std::pow(s.H, 1.0 / e.q) -
                s.zeta_norm * s.eta_norm * sol.Y;
    res.gamma = sol.gamma;
    res.Y = sol.Y;
    res.residual_eq1 = sol.residual_eq1;
    res.residual_eq2 = sol.residual_eq2;
    return res;
}

double eval_bellman_p2_closed(const BellmanPoint& pt) {
    const ExponentPair e = ExponentPair::from_p(2.0);
    require_point(pt, e);
    const double a = pt.Z - pt.zeta.squaredNorm();
    const double b = pt.H - pt.eta.squaredNorm();
    return std::sqrt(std::max(0.0, a) * std::max(0.0, b));
}

std::optional<double> infimum_objective(double gamma, double s_var, const ScalarParams& s,
                                        const ExponentPair& e) {
    const double rad = b_special(s.zeta_norm, s_var, gamma, e) + cost_constant(gamma, e) * s.Z;
    if (rad < 0.0) return std::nullopt;
    return -s_var * s.eta_norm + std::pow(s.H, 1.0 / e.q) * std::pow(rad, 1.0 / e.p);
}

double eval_via_infimum(const BellmanPoint& pt, const ExponentPair& e, int grid_n,
                        int refine_rounds) {
    if (!(e.p > 1.0) || !(e.p <= 2.0)) {
        throw std::invalid_argument("eval_via_infimum: requires 1 < p <= 2");
    }
    if (grid_n < 2 || refine_rounds < 0) {
        throw std::invalid_argument("eval_via_infimum: grid_n >= 2, refine_rounds >= 0");
    }
    require_point(pt, e);
    const ScalarParams s = pt.scalars();
    const double zp = std::pow(s.zeta_norm, e.p);
    const double hq = std::pow(s.eta_norm, e.q);
    if (!(s.Z > zp) || !(s.H > hq)) {
        throw std::invalid_argument("eval_via_infimum: requires strict interior point");
    }
    const double gmax = e.gamma_max();
    double s_cap = 10.0 * gmax * std::max(1.0, s.zeta_norm) *
                   std::pow(s.Z / std::max(zp, s.Z / 100.0), 1.0 / e.p);

    for (int expansion = 0; expansion < 60; ++expansion) {
        double best_val = std::numeric_limits<double>::infinity();
        double best_g = gmax;
        double best_s = 0.0;
        double g_lo = 0.0, g_hi = gmax, s_lo = 0.0, s_hi = s_cap;
        for (int round = 0; round <= refine_rounds; ++round) {
            for (int i = 0; i < grid_n; ++i) {
                const double g = g_lo + (g_hi - g_lo) * (i + 1) / grid_n;
                if (!(g > 0.0) || g > gmax) continue;
                for (int j = 0; j < grid_n; ++j) {
                    const double sv = s_lo + (s_hi - s_lo) * j / (grid_n - 1);
                    if (sv < 0.0) continue;
                    const auto v = infimum_objective(g, sv, s, e);
                    if (v && *v < best_val) {
                        best_val = *v;
                        best_g = g;
                        best_s = sv;
                    }
                }
            }
            const double g_w = (g_hi - g_lo) / 10.0;
            const double s_w = (s_hi - s_lo) / 10.0;
            g_lo = std::max(0.0, best_g - 0.5 * g_w);
            g_hi = std::min(gmax, best_g + 0.5 * g_w);
            s_lo = std::max(0.0, best_s - 0.5 * s_w);
            s_hi = std::min(s_cap, best_s + 0.5 * s_w);
        }
        // Re-run with a larger s window if the incumbent sits on the cap.
        if (best_s < s_cap * (1.0 - 1e-9)) return best_val;
        s_cap *= 2.0;
    }
    throw std::runtime_error("eval_via_infimum: s window kept saturating");
}

} // namespace bellman
