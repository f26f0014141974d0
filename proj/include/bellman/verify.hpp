#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bellman/evaluator.hpp"
#include "bellman/random.hpp"

namespace bellman {

/// Outcome of one property suite. `worst_slack` is the suite's normalized
/// margin (negative means the property was violated by more than rounding;
/// the failure thresholds are fixed inside each suite). The worst input is
/// serialized whenever at least one sample failed, and always kept for the
/// most extreme sample seen.
struct VerificationReport {
    std::string suite;
    long long samples = 0;
    long long failures = 0;
    double worst_slack = 0.0;
    std::string worst_case_input;
    double elapsed_seconds = 0.0;
};

/// Mixed absolute/relative normalization used by the slack checks:
/// scale = 1 + |value| + (p* - 1) Z^(1/p) H^(1/q).
double slack_scale(double value, const ScalarParams& s, const ExponentPair& e);

// Samplers over the domain. Gaussian zeta/eta; Z = |zeta|^p (1 + u),
// H = |eta|^q (1 + v) with u, v drawn squared-uniform on [0, 9] (domain
// measure) or uniform on [u_min, u_max] (interior measure, bounded away
// from the boundary where finite-delta bounds and grid searches are
// conditioned).
BellmanPoint sample_domain_point(Rng& rng, const ExponentPair& e, int dim);
BellmanPoint sample_interior_point(Rng& rng, const ExponentPair& e, int dim,
                                   double u_min = 0.25, double u_max = 9.0);
BellmanPoint sample_boundary_point(Rng& rng, const ExponentPair& e, int dim);
BellmanPoint sample_near_boundary_point(Rng& rng, const ExponentPair& e, int dim);
/// Pair constructed around the branch interface |eta|^q Z = |zeta|^p H.
std::pair<BellmanPoint, BellmanPoint> sample_straddling_pair(Rng& rng, const ExponentPair& e,
                                                             int dim);

/// Size bound 0 <= B <= (p* - 1) Z^(1/p) H^(1/q), n_samples per (p, dim)
/// combination, 10% boundary and 10% near-boundary strata.
VerificationReport check_condition_I(long long n_samples, std::uint64_t seed,
                                     const std::vector<double>& p_list,
                                     const std::vector<int>& dim_list);

/// Midpoint concavity B(mid) - avg >= |dzeta/2| |deta/2|, n_samples random
/// pairs plus n_samples interface-straddling pairs, combos cycled.
VerificationReport check_condition_II(long long n_samples, std::uint64_t seed,
                                      const std::vector<double>& p_list,
                                      const std::vector<int>& dim_list);

/// B_p(zeta, eta, Z, H) = B_q(eta, zeta, H, Z), p cycled over {1.2, 1.5, 2}.
VerificationReport check_duality(long long n_samples, std::uint64_t seed);

/// Cross-path agreement |eval_via_infimum - eval_bellman| <= 1e-4 relative,
/// plus the sandwich lower bound <= value <= dual objective at the solved
/// parameters.
VerificationReport check_consistency(long long n_samples, std::uint64_t seed, int grid_n = 200,
                                     int refine_rounds = 4);

/// Subordination bound slack >= -1e-10 scale over random trees, p cycled
/// over {1.2, 1.5, 1.8} and gamma over {0.3, 1.0} of 1/(p-1).
VerificationReport check_subordination(long long n_samples, std::uint64_t seed, int max_depth = 8);

/// Sign-flip norm ratio <= p* - 1 + 1e-10 over random coefficient/sign
/// configurations at p in {1.5, 3}.
VerificationReport check_haar(long long n_samples, std::uint64_t seed);

/// Dispatch by suite name: I, II, duality, consistency, subordination, haar.
VerificationReport run_suite(const std::string& name, long long n_samples, std::uint64_t seed);

/// All suite names, in the order `all` runs them.
const std::vector<std::string>& suite_names();

} // namespace bellman
