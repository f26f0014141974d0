#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bellman/evaluator.hpp"
#include "bellman/verify.hpp"
#include "test_util.hpp"

using namespace bellman;
using testutil::rel_close;

namespace {
const ExponentPair e15 = ExponentPair::from_p(1.5);
const ExponentPair e20 = ExponentPair::from_p(2.0);
} // namespace

TEST_CASE("classify_branch cases") {
    CHECK(classify_branch(BellmanPoint(1.0, 1.0, 3.0, 2.0), e15) == Branch::FirstBranch);
    CHECK(classify_branch(BellmanPoint(1.0, 0.1, 2.0, 2.0), e15) == Branch::SecondBranch);
    CHECK(classify_branch(BellmanPoint(0.0, 1.0, 0.5, 2.0), e15) == Branch::FirstBranch);
    CHECK(classify_branch(BellmanPoint(1.0, 0.5, 1.0, 2.0), e15) == Branch::Boundary);
    CHECK(classify_branch(BellmanPoint(1.0, 0.5, 2.0, std::pow(0.5, 3.0)), e15) ==
          Branch::Boundary);
    CHECK_THROWS_AS(classify_branch(BellmanPoint(1.0, 0.5, 0.9, 2.0), e15),
                    std::invalid_argument); // outside the domain
    CHECK_THROWS_AS(classify_branch(BellmanPoint(1.0, 0.5, 2.0, 2.0), ExponentPair::from_p(3.0)),
                    std::invalid_argument);
}

TEST_CASE("eval_bellman fixed points") {
    // p = 2 cross of the closed form
    const auto r1 = eval_bellman(BellmanPoint(0.5, 0.5, 1.0, 1.0), e20);
    CHECK(r1.value == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(r1.branch == Branch::SecondBranch);

    // first branch: (H - |eta|^q)^(1/q) (Z - |zeta|^p)^(1/p) / (p-1) = 2 * 2^(2/3)
    const auto r2 = eval_bellman(BellmanPoint(1.0, 1.0, 3.0, 2.0), e15);
    CHECK(r2.value == doctest::Approx(3.1748021039363987).epsilon(1e-13));
    CHECK(r2.branch == Branch::FirstBranch);

    // boundary
    const auto r3 = eval_bellman(BellmanPoint(1.0, 0.5, 1.0, 7.0), e15);
    CHECK(r3.value == 0.0);
    CHECK(r3.branch == Branch::Boundary);

    // second branch, frozen against the dense grid minimization oracle
    const auto r4 = eval_bellman(BellmanPoint(1.0, 0.1, 2.0, 2.0), e15);
    CHECK(r4.branch == Branch::SecondBranch);
    CHECK(r4.value == doctest::Approx(2.690061896226917).epsilon(1e-11));
    REQUIRE(r4.gamma.has_value());
    CHECK(*r4.gamma == doctest::Approx(1.349631377081126).epsilon(1e-11));

    // the same value through the grid oracle, scaled by |zeta|
    const GammaYSolution grid = minimize_L_grid(ScalarParams{1.0, 0.1, 2.0, 2.0}, e15, 64, 4);
    const auto w = w_objective(grid.gamma, grid.Y, ScalarParams{1.0, 0.1, 2.0, 2.0}, e15);
    REQUIRE(w.has_value());
    CHECK(rel_close(*w * 1.0, r4.value, 1e-7));
}

TEST_CASE("p=2 closed form oracle across the domain") {
    Rng rng(301);
    for (int i = 0; i < 2000; ++i) {
        const int d = rng.uniform_int(1, 3);
        const BellmanPoint pt = sample_domain_point(rng, e20, d);
        const double a = eval_bellman(pt, e20).value;
        const double b = eval_bellman_p2_closed(pt);
        const double floor = 1e-13 * slack_scale(b, pt.scalars(), e20);
        CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), std::abs(b)) + floor);
    }
    CHECK(eval_bellman_p2_closed(BellmanPoint(0.0, 0.0, 1.0, 1.0)) == 1.0);
    CHECK(eval_bellman_p2_closed(BellmanPoint(0.5, 0.5, 0.25, 3.0)) == 0.0);
}

TEST_CASE("dual swap at p > 2") {
    Rng rng(302);
    for (double p : {2.5, 3.0, 10.0}) {
        const auto e = ExponentPair::from_p(p);
        for (int i = 0; i < 200; ++i) {
            const BellmanPoint pt = sample_domain_point(rng, e, rng.uniform_int(1, 3));
            const auto res = eval_bellman(pt, e);
            CHECK(res.branch == Branch::DualSwapped);
            CHECK(res.value >= 0.0);
            const ScalarParams s = pt.scalars();
            const double bound =
                (e.p_star - 1.0) * std::pow(s.Z, 1.0 / e.p) * std::pow(s.H, 1.0 / e.q);
            CHECK(res.value <= bound + 1e-9 * slack_scale(res.value, s, e));
            // definitional identity with the conjugate evaluation
            const auto mirror =
                eval_bellman(BellmanPoint(pt.eta, pt.zeta, pt.H, pt.Z), e.conjugate());
            CHECK(res.value == mirror.value);
        }
    }
}

TEST_CASE("duality within 1 < p <= 2") {
    Rng rng(303);
    for (int i = 0; i < 600; ++i) {
        const double p = (i % 3 == 0) ? 2.0 : rng.uniform(1.05, 2.0);
        const auto e = ExponentPair::from_p(p);
        const BellmanPoint pt = sample_domain_point(rng, e, rng.uniform_int(1, 3));
        const double a = eval_bellman(pt, e).value;
        const double b =
            eval_bellman(BellmanPoint(pt.eta, pt.zeta, pt.H, pt.Z), ExponentPair::from_p(e.q))
                .value;
        const double floor = 1e-13 * slack_scale(a, pt.scalars(), e);
        CHECK(std::abs(a - b) <= 1e-8 * std::max(std::abs(a), std::abs(b)) + floor);
    }
}

TEST_CASE("branch interface continuity") {
    Rng rng(304);
    for (int i = 0; i < 100; ++i) {
        const auto e = ExponentPair::from_p(rng.uniform(1.1, 2.0));
        const double zn = rng.uniform(0.3, 2.0);
        const double en = rng.uniform(0.3, 2.0);
        const double H = std::pow(en, e.q) * rng.uniform(1.3, 6.0);
        const double z_star = std::pow(zn, e.p) * H / std::pow(en, e.q);
        const double lo =
            eval_bellman(BellmanPoint(zn, en, z_star * (1.0 - 1e-8), H), e).value;
        const double hi =
            eval_bellman(BellmanPoint(zn, en, z_star * (1.0 + 1e-8), H), e).value;
        CHECK(rel_close(lo, hi, 1e-6));
    }
}

TEST_CASE("rotation invariance of the evaluator") {
    Rng rng(305);
    for (int i = 0; i < 300; ++i) {
        const auto e = ExponentPair::from_p(rng.uniform(1.05, 2.0));
        const BellmanPoint pt = sample_domain_point(rng, e, rng.uniform_int(2, 3));
        const auto [zr, hr] = testutil::rotate_pair(rng, pt.zeta, pt.eta);
        const double a = eval_bellman(pt, e).value;
        const double b = eval_bellman(BellmanPoint(zr, hr, pt.Z, pt.H), e).value;
        CHECK(rel_close(a, b, 1e-14, 1e-14));
    }
}

TEST_CASE("midpoint concavity quick sample") {
    Rng rng(306);
    for (int i = 0; i < 500; ++i) {
        const auto e = ExponentPair::from_p(rng.uniform(1.05, 2.0));
        const int d = rng.uniform_int(1, 3);
        const BellmanPoint a = sample_domain_point(rng, e, d);
        const BellmanPoint b = sample_domain_point(rng, e, d);
        const BellmanPoint mid(0.5 * (a.zeta + b.zeta), 0.5 * (a.eta + b.eta), 0.5 * (a.Z + b.Z),
                               0.5 * (a.H + b.H));
        const double lhs = eval_bellman(mid, e).value -
                           0.5 * (eval_bellman(a, e).value + eval_bellman(b, e).value);
        const double rhs = 0.25 * (b.zeta - a.zeta).norm() * (b.eta - a.eta).norm();
        CHECK(lhs - rhs >= -1e-9 * slack_scale(lhs, mid.scalars(), e));
    }
    // degenerate pair: equality at zero
    const BellmanPoint a(1.0, 0.5, 2.0, 2.0);
    const double lhs = eval_bellman(a, e15).value - eval_bellman(a, e15).value;
    CHECK(lhs == 0.0);
}

TEST_CASE("eval_via_infimum closed sub-case at zeta = 0") {
    Rng rng(307);
    for (int i = 0; i < 10; ++i) {
        const auto e = ExponentPair::from_p(rng.uniform(1.2, 2.0));
        const int d = rng.uniform_int(1, 3);
        Eigen::VectorXd eta = rng.normal_vector(d);
        if (eta.norm() < 0.1) eta(0) += 0.5;
        const double Z = rng.uniform(0.5, 4.0);
        const double H = std::pow(eta.norm(), e.q) * rng.uniform(1.3, 5.0);
        const BellmanPoint pt(Eigen::VectorXd::Zero(d), eta, Z, H);
        const double got = eval_via_infimum(pt, e, 160, 4);
        const double want = std::pow(Z, 1.0 / e.p) *
                            std::pow(H - std::pow(eta.norm(), e.q), 1.0 / e.q) / (e.p - 1.0);
        CHECK(rel_close(got, want, 1e-5));
    }
}

TEST_CASE("eval_via_infimum agrees with the solver path") {
    Rng rng(308);
    for (int i = 0; i < 12; ++i) {
        const auto e = ExponentPair::from_p(rng.uniform(1.2, 2.0));
        const BellmanPoint pt = sample_interior_point(rng, e, rng.uniform_int(1, 3));
        const double ev = eval_bellman(pt, e).value;
        const double inf_v = eval_via_infimum(pt, e, 200, 4);
        CHECK(rel_close(inf_v, ev, 1e-4));
    }
}

TEST_CASE("eval_via_infimum refinement is monotone") {
    Rng rng(309);
    const auto e = ExponentPair::from_p(1.6);
    const BellmanPoint pt = sample_interior_point(rng, e, 2);
    double prev = std::numeric_limits<double>::infinity();
    for (int rounds = 0; rounds <= 4; ++rounds) {
        const double v = eval_via_infimum(pt, e, 60, rounds);
        CHECK(v <= prev + 1e-13 * (1.0 + std::abs(prev)));
        prev = v;
    }
}

TEST_CASE("domain and p validation") {
    CHECK_THROWS_AS(eval_bellman(BellmanPoint(1.0, 0.5, 0.5, 2.0), e15), std::invalid_argument);
    CHECK_NOTHROW(eval_bellman(BellmanPoint(0.5, 0.5, 1.0, 1.0),
                               ExponentPair::from_p(1.0 + 1e-6)));
    CHECK_THROWS_AS(ExponentPair::from_p(1.0 + 1e-9), std::invalid_argument);
    // vector length mismatch
    BellmanPoint bad;
    bad.zeta = Eigen::VectorXd::Zero(2);
    bad.eta = Eigen::VectorXd::Zero(3);
    bad.Z = 1.0;
    bad.H = 1.0;
    CHECK_THROWS_AS(eval_bellman(bad, e15), std::invalid_argument);
}
