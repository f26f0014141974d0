#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bellman {

/// Conjugate exponent triple (p, q, p*) with q = p/(p-1) and p* = max(p, q).
/// Every formula in the library is parameterized by one of these.
struct ExponentPair {
    double p;
    double q;
    double p_star;

    static ExponentPair from_p(double p) {
        if (!(p >= 1.0 + 1e-6) || !(p <= 1e6)) {
            throw std::invalid_argument("ExponentPair: p must lie in [1 + 1e-6, 1e6]");
        }
        ExponentPair e;
        e.p = p;
        e.q = p / (p - 1.0);
        e.p_star = std::max(e.p, e.q);
        return e;
    }

    /// Swapped pair (q, p); p* is unchanged.
    ExponentPair conjugate() const {
        ExponentPair e;
        e.p = q;
        e.q = p;
        e.p_star = p_star;
        return e;
    }

    /// Upper endpoint gamma_max = 1/(p-1) of the admissible gamma interval.
    double gamma_max() const { return 1.0 / (p - 1.0); }
};

/// A domain point reduced to scalars: the formulas depend on the vectors
/// only through their norms.
struct ScalarParams {
    double zeta_norm = 0.0;
    double eta_norm = 0.0;
    double Z = 0.0;
    double H = 0.0;

    /// Membership in the domain: Z >= |zeta|^p and H >= |eta|^q, with a
    /// 1e-12 relative tolerance for rounding of the power.
    bool in_domain(const ExponentPair& e) const {
        if (!(Z >= 0.0) || !(H >= 0.0) || !(zeta_norm >= 0.0) || !(eta_norm >= 0.0)) return false;
        return Z >= std::pow(zeta_norm, e.p) * (1.0 - 1e-12) &&
               H >= std::pow(eta_norm, e.q) * (1.0 - 1e-12);
    }
};

} // namespace bellman
