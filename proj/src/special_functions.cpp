#include "bellman/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace bellman {

namespace {

void require_low_range(const ExponentPair& e, const char* who) {
    if (!(e.p > 1.0) || !(e.p <= 2.0)) {
        throw std::invalid_argument(std::string(who) + ": requires 1 < p <= 2");
    }
}

void require_gamma(double gamma, const ExponentPair& e, const char* who) {
    if (!(gamma > 0.0) || !(gamma <= e.gamma_max())) {
        throw std::invalid_argument(std::string(who) + ": gamma out of (0, 1/(p-1)]");
    }
}

} // namespace

double kappa(double t, const ExponentPair& e) {
    require_low_range(e, "kappa");
    if (!(t >= 0.0)) throw std::invalid_argument("kappa: t must be >= 0");
    return (1.0 - (e.p - 1.0) * t) * std::pow(1.0 + t, e.p - 1.0);
}

double delta_fn(double t, const ExponentPair& e) {
    require_low_range(e, "delta_fn");
    if (!(t >= 0.0)) throw std::invalid_argument("delta_fn: t must be >= 0");
    return t * std::pow(1.0 + t, e.p - 2.0);
}

double cost_constant(double gamma, const ExponentPair& e) {
    require_low_range(e, "cost_constant");
    require_gamma(gamma, e, "cost_constant");
    const double p = e.p;
    return ((2.0 - p) * detail::guarded_pow(gamma, p - 1.0) +
            detail::guarded_pow(gamma, p - 2.0)) /
           (p - 1.0);
}

double b_special(double x_norm, double y_norm, double gamma, const ExponentPair& e) {
    require_low_range(e, "b_special");
    require_gamma(gamma, e, "b_special");
    const double p = e.p;
    if (y_norm < gamma * x_norm) {
        return detail::guarded_pow(gamma / (gamma + 1.0), p - 2.0) *
               std::pow(x_norm + y_norm, p - 1.0) * (y_norm - x_norm / (p - 1.0));
    }
    return std::pow(y_norm, p) - cost_constant(gamma, e) * std::pow(x_norm, p);
}

double b_special(const Eigen::Ref<const Eigen::VectorXd>& x,
                 const Eigen::Ref<const Eigen::VectorXd>& y, double gamma,
                 const ExponentPair& e) {
    if (x.size() != y.size()) throw std::invalid_argument("b_special: dimension mismatch");
    return b_special(x.norm(), y.norm(), gamma, e);
}

std::optional<double> w_objective(double gamma, double Y, const ScalarParams& s,
                                  const ExponentPair& e) {
    require_low_range(e, "w_objective");
    require_gamma(gamma, e, "w_objective");
    if (!(Y >= 0.0)) throw std::invalid_argument("w_objective: Y must be >= 0");
    if (!(s.zeta_norm > 0.0)) throw std::invalid_argument("w_objective: |zeta| must be > 0");
    const double zp = std::pow(s.zeta_norm, e.p);
    const double hq = std::pow(s.eta_norm, e.q);
    if (!(s.Z > zp) || !(s.H > hq)) {
        throw std::invalid_argument("w_objective: requires Z > |zeta|^p and H > |eta|^q");
    }
    const double rad = b_special(1.0, Y, gamma, e) + cost_constant(gamma, e) * s.Z / zp;
    if (rad < 0.0) return std::nullopt;
    return -Y * s.eta_norm + std::pow(s.H, 1.0 / e.q) * std::pow(rad, 1.0 / e.p);
}

double f_univariate(double Y, const ScalarParams& s, const ExponentPair& e) {
    require_low_range(e, "f_univariate");
    if (!(Y >= 0.0)) throw std::invalid_argument("f_univariate: Y must be >= 0");
    if (!(s.zeta_norm > 0.0)) throw std::domain_error("f_univariate: |zeta| must be > 0");
    const double zp = std::pow(s.zeta_norm, e.p);
    if (!(s.Z > zp)) throw std::invalid_argument("f_univariate: requires Z > |zeta|^p");
    const double c = std::pow(e.p - 1.0, -e.p) * (s.Z / zp - 1.0);
    return -Y * s.eta_norm + std::pow(s.H, 1.0 / e.q) * std::pow(std::pow(Y, e.p) + c, 1.0 / e.p);
}

double f_univariate_argmin(const ScalarParams& s, const ExponentPair& e) {
    require_low_range(e, "f_univariate_argmin");
    if (!(s.zeta_norm > 0.0)) throw std::domain_error("f_univariate_argmin: |zeta| must be > 0");
    const double zp = std::pow(s.zeta_norm, e.p);
    const double hq = std::pow(s.eta_norm, e.q);
    if (!(s.Z > zp) || !(s.H > hq)) {
        throw std::invalid_argument("f_univariate_argmin: requires interior point");
    }
    return e.gamma_max() * std::pow((s.Z - zp) / (s.H - hq) * hq / zp, 1.0 / e.p);
}

} // namespace bellman
