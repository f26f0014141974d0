#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bellman/system_solver.hpp"
#include "test_util.hpp"

using namespace bellman;
using testutil::rel_close;

namespace {

const ExponentPair e15 = ExponentPair::from_p(1.5);

ScalarParams random_second_branch(Rng& rng, const ExponentPair& e) {
    for (;;) {
        ScalarParams s;
        s.zeta_norm = std::abs(rng.normal()) + 0.05;
        s.eta_norm = std::abs(rng.normal()) + 0.05;
        s.Z = std::pow(s.zeta_norm, e.p) * (1.0 + rng.uniform(1e-4, 9.0));
        s.H = std::pow(s.eta_norm, e.q) * (1.0 + rng.uniform(1e-4, 9.0));
        if (std::pow(s.eta_norm, e.q) * s.Z < std::pow(s.zeta_norm, e.p) * s.H * (1.0 - 1e-8)) {
            return s;
        }
    }
}

} // namespace

TEST_CASE("solve_G reductions and residual") {
    Rng rng(201);
    const ExponentPair e2 = ExponentPair::from_p(2.0);
    for (int i = 0; i < 1000; ++i) {
        const double y = rng.uniform(1e-3, 5.0);
        const double r = rng.uniform(1e-3, 0.999);
        // p = 2 makes delta_fn the identity, so G = Y / r exactly.
        CHECK(rel_close(solve_G(y, r, e2), y / r, 1e-13));

        const auto e = ExponentPair::from_p(rng.uniform(1.05, 2.0));
        const double g = solve_G(y, r, e);
        CHECK(g > y);
        CHECK(std::abs(delta_fn(y, e) - r * delta_fn(g, e)) <=
              1e-13 * std::max(1.0, delta_fn(g, e)));
    }
    // r -> 1 forces G -> Y
    const double g_near = solve_G(1.0, 1.0 - 1e-12, e15);
    CHECK(rel_close(g_near, 1.0, 1e-9));
    CHECK_THROWS_AS(solve_G(0.0, 0.5, e15), std::invalid_argument);
    CHECK_THROWS_AS(solve_G(1.0, 1.5, e15), std::invalid_argument);
}

TEST_CASE("solve_G monotone in Y at fixed r") {
    Rng rng(202);
    for (int i = 0; i < 500; ++i) {
        const auto e = ExponentPair::from_p(rng.uniform(1.05, 2.0));
        const double r = rng.uniform(0.05, 0.95);
        const double y1 = rng.uniform(1e-3, 3.0);
        const double y2 = y1 + rng.uniform(1e-6, 3.0);
        CHECK(solve_G(y1, r, e) < solve_G(y2, r, e));
    }
}

TEST_CASE("solve_system eta=0 shortcut against frozen root") {
    // kappa(gamma) = 1/2 at p = 3/2, i.e. (1 - gamma/2) sqrt(1 + gamma) = 1/2,
    // rooted independently by high-precision bisection.
    ScalarParams s{1.0, 0.0, 2.0, 5.0};
    const GammaYSolution sol = solve_system(s, e15);
    CHECK(sol.Y == 0.0);
    CHECK(sol.gamma == doctest::Approx(1.347296355333861).epsilon(1e-12));
    CHECK(std::max(sol.residual_eq1, sol.residual_eq2) <= 1e-12);
}

TEST_CASE("solve_system residuals and ordering across p") {
    Rng rng(203);
    for (double p : {1.1, 1.3, 1.5, 1.9, 2.0}) {
        const auto e = ExponentPair::from_p(p);
        for (int i = 0; i < 150; ++i) {
            const ScalarParams s = random_second_branch(rng, e);
            const GammaYSolution sol = solve_system(s, e);
            CHECK(sol.Y >= 0.0);
            CHECK(sol.Y < sol.gamma);
            CHECK(sol.gamma < e.gamma_max());
            CHECK(std::max(sol.residual_eq1, sol.residual_eq2) <= 1e-11);
        }
    }
}

TEST_CASE("solve_system rejects wrong regions") {
    CHECK_THROWS_AS(solve_system(ScalarParams{1.0, 1.0, 3.0, 2.0}, e15),
                    std::invalid_argument); // |eta|^q Z >= |zeta|^p H
    CHECK_THROWS_AS(solve_system(ScalarParams{1.0, 0.1, 1.0, 2.0}, e15),
                    std::invalid_argument); // Z = |zeta|^p
    CHECK_THROWS_AS(solve_system(ScalarParams{1.0, 0.1, 2.0, 2.0}, ExponentPair::from_p(3.0)),
                    std::invalid_argument);
}

TEST_CASE("Fhat changes sign exactly once on the bracket") {
    Rng rng(204);
    for (int trial = 0; trial < 30; ++trial) {
        const auto e = ExponentPair::from_p(rng.uniform(1.1, 2.0));
        const ScalarParams s = random_second_branch(rng, e);
        const double zp = std::pow(s.zeta_norm, e.p);
        const double hq = std::pow(s.eta_norm, e.q);
        const double r = std::pow(hq * s.Z / (zp * s.H), 1.0 / e.q);
        // Y_max solves delta(Y_max) = r delta(1/(p-1)).
        double lo = 0.0, hi = e.gamma_max();
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (delta_fn(mid, e) - r * delta_fn(e.gamma_max(), e) <= 0.0 ? lo : hi) = mid;
        }
        const double y_max = lo;
        int sign_changes = 0;
        double prev = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double y = y_max * k / 101.0;
            const double f = kappa(y, e) - (s.Z / zp) * kappa(solve_G(y, r, e), e);
            if (k > 1 && f * prev < 0.0) ++sign_changes;
            prev = f;
        }
        CHECK(sign_changes == 1);
    }
}

TEST_CASE("solve_system determinism") {
    Rng rng(205);
    for (int i = 0; i < 50; ++i) {
        const auto e = ExponentPair::from_p(rng.uniform(1.05, 2.0));
        const ScalarParams s = random_second_branch(rng, e);
        const GammaYSolution a = solve_system(s, e);
        const GammaYSolution b = solve_system(s, e);
        CHECK(a.gamma == b.gamma);
        CHECK(a.Y == b.Y);
        CHECK(a.residual_eq1 == b.residual_eq1);
        CHECK(a.iterations == b.iterations);
    }
}

TEST_CASE("minimize_L_grid corner case") {
    // |eta|^q Z >= |zeta|^p H drives the incumbent to the corner
    // (1/(p-1), 1/(p-1)).
    const ExponentPair e = ExponentPair::from_p(1.4);
    ScalarParams s{1.0, 1.5, 0.0, 0.0};
    s.Z = std::pow(s.zeta_norm, e.p) * 4.0;
    s.H = std::pow(s.eta_norm, e.q) * 1.5;
    REQUIRE(std::pow(s.eta_norm, e.q) * s.Z >= std::pow(s.zeta_norm, e.p) * s.H);
    const GammaYSolution sol = minimize_L_grid(s, e, 48, 3);
    const double cell = e.gamma_max() / 48.0 / 1e3;
    CHECK(std::abs(sol.gamma - e.gamma_max()) <= cell + 1e-12);
    CHECK(std::abs(sol.Y - e.gamma_max()) <= cell + 1e-12);
}

TEST_CASE("minimize_L_grid agrees with solve_system") {
    Rng rng(206);
    for (int trial = 0; trial < 8; ++trial) {
        const auto e = ExponentPair::from_p(rng.uniform(1.2, 2.0));
        ScalarParams s = random_second_branch(rng, e);
        const GammaYSolution grid = minimize_L_grid(s, e, 64, 4);
        const GammaYSolution exact = solve_system(s, e);
        // final refinement window is gmax/10^4, spacing that/64
        const double cell = e.gamma_max() * 1e-4 / 64.0;
        CHECK(std::abs(grid.gamma - exact.gamma) <= 3.0 * cell);
        CHECK(std::abs(grid.Y - exact.Y) <= 3.0 * cell);
        // within one starting-grid refinement chain of the optimum
        const auto w_grid = w_objective(grid.gamma, grid.Y, s, e);
        const auto w_exact = w_objective(exact.gamma, exact.Y, s, e);
        REQUIRE(w_grid.has_value());
        REQUIRE(w_exact.has_value());
        CHECK(*w_grid >= *w_exact - 1e-12 * (1.0 + std::abs(*w_exact)));
        CHECK(rel_close(*w_grid, *w_exact, 1e-6, 1e-9));
    }
}

TEST_CASE("minimize_L_grid refinement never increases the incumbent") {
    Rng rng(207);
    for (int trial = 0; trial < 6; ++trial) {
        const auto e = ExponentPair::from_p(rng.uniform(1.2, 2.0));
        const ScalarParams s = random_second_branch(rng, e);
        double prev = std::numeric_limits<double>::infinity();
        for (int rounds = 0; rounds <= 3; ++rounds) {
            const GammaYSolution sol = minimize_L_grid(s, e, 32, rounds);
            const auto w = w_objective(sol.gamma, sol.Y, s, e);
            REQUIRE(w.has_value());
            CHECK(*w <= prev + 1e-14 * (1.0 + std::abs(prev)));
            prev = *w;
        }
    }
}

TEST_CASE("frozen second-branch point") {
    // p = 3/2, |zeta| = 1, |eta| = 0.1, Z = 2, H = 2; the solved pair was
    // cross-checked against a dense grid minimization of the restricted
    // objective.
    const GammaYSolution sol = solve_system(ScalarParams{1.0, 0.1, 2.0, 2.0}, e15);
    CHECK(sol.gamma == doctest::Approx(1.349631377081126).epsilon(1e-11));
    CHECK(sol.Y == doctest::Approx(0.09200857935334603).epsilon(1e-9));
}
