#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "hypvar/functionals.hpp"
#include "test_support.hpp"

using namespace hypvar;

namespace {

const GridPtr& grid() {
    static const GridPtr g = RadialGrid::hyperbolic();
    return g;
}

const GroundStateConstants& constants() {
    static const GroundStateConstants k = ground_state::default_constants();
    return k;
}

// Exact norms of e^{-2r}: l2 = pi/6, grad = 4 l2.
constexpr double e2_l2 = std::numbers::pi / 6;
constexpr double e2_grad = 4 * std::numbers::pi / 6;

RadialProfile e2(double c) { return sample_exponential(grid(), 2.0, c); }

} // namespace

TEST(Energy, ZeroProfile) { EXPECT_EQ(energy(RadialProfile::zero(grid())), 0.0); }

TEST(Energy, SmallExponentialIsQuadratic) {
    const double eps = 1e-3;
    EXPECT_LT(oracle::rel_err(energy(e2(eps)), eps * eps * e2_grad / 2), 1e-6);
}

TEST(Energy, LargeAmplitudeIsNegative) { EXPECT_LT(energy(e2(10.0)), 0.0); }

TEST(Energy, MatchesNormsExactly) {
    const auto u = e2(0.7);
    const NormReport n = norm_report(u);
    EXPECT_EQ(energy(u), n.grad_sq / 2 - n.l6_6 / 6);
}

TEST(JValue, SmallAmplitudeLimit) {
    EXPECT_NEAR(j_value(e2(1e-6)), 2.0, 1e-4);
    const auto u = sample_exponential(grid(), 1.01, 1e-4);
    EXPECT_NEAR(j_value(u), 1.01 * 1.01 / 2, 1e-3);
    EXPECT_ERROR_KIND(j_value(RadialProfile::zero(grid())), ErrorKind::division_undefined);
}

TEST(JValue, ScalingClosedForm) {
    suite::Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const auto u = suite::smooth_profile(grid(), rng);
        const NormReport n = norm_report(u);
        for (double c : {0.1, 0.5, 2.0}) {
            const double want = (0.5 * n.grad_sq - std::pow(c, 4) * n.l6_6 / 6) / n.l2_sq;
            EXPECT_LT(oracle::rel_err(j_value(u.scaled(c)), want), 1e-10);
        }
        const double rq = n.grad_sq / n.l2_sq;
        EXPECT_LT(oracle::rel_err(j_value(u.scaled(1e-4)), 0.5 * rq), 1e-6);
    }
}

TEST(Omega, Membership) {
    const auto& k = constants();
    const FunctionalReport small = omega_status(e2(0.01), k);
    EXPECT_TRUE(small.in_omega);
    EXPECT_GT(small.grad_margin, 0.0);
    EXPECT_GT(small.energy_margin, 0.0);

    const FunctionalReport big = omega_status(e2(100.0), k);
    EXPECT_FALSE(big.in_omega);
    EXPECT_LT(big.grad_margin, 0.0);
    EXPECT_NEAR(big.norms.grad_sq, 1e4 * e2_grad, 1.0);

    const FunctionalReport zero = omega_status(RadialProfile::zero(grid()), k);
    EXPECT_FALSE(zero.in_omega);
    EXPECT_FALSE(zero.j_value.has_value());
}

TEST(Omega, MembershipMatchesMargins) {
    suite::Rng rng(8);
    for (int t = 0; t < 50; ++t) {
        const auto u = suite::smooth_profile(grid(), rng).scaled(suite::uniform(rng, 0.1, 30.0));
        const FunctionalReport rep = omega_status(u, constants());
        EXPECT_EQ(rep.in_omega, rep.grad_margin > 0 && rep.energy_margin > 0);
        EXPECT_EQ(rep.energy, rep.norms.grad_sq / 2 - rep.norms.l6_6 / 6);
    }
}

TEST(Trapping, DeltaBarSatisfiesBothScalarFacts) {
    const auto& k = constants();
    const double c6 = std::pow(k.c3, 6);
    const double g = k.grad_q_sq;
    auto f1 = [&](double y) { return y / 2 - c6 * y * y * y / 6; };
    auto g1 = [&](double y) { return y - c6 * y * y * y; };
    double previous = 0.0;
    for (double d0 : {0.01, 0.1, 0.3, 0.6, 0.9}) {
        const double db = trapping_delta_bar(d0, k);
        EXPECT_GT(db, 0.0);
        EXPECT_LT(db, 1.0);
        EXPECT_GT(db, previous);
        previous = db;
        const double y = (1 - db) * g;
        EXPECT_GE(f1(y), (1 - d0) * k.energy_q);
        EXPECT_GE(g1(y), db * y);
        const double y_out = (1 - db - 1e-9) * g;
        EXPECT_TRUE(f1(y_out) < (1 - d0) * k.energy_q || g1(y_out) < (db + 1e-9) * y_out);
    }
    EXPECT_ERROR_KIND(trapping_delta_bar(0.0, k), ErrorKind::invalid_parameter);
    EXPECT_ERROR_KIND(trapping_delta_bar(1.0, k), ErrorKind::invalid_parameter);
}

TEST(Trapping, SmallDataIsTrapped) {
    const TrappingReport rep = trapping_check(e2(0.01), 0.1, constants());
    EXPECT_GE(rep.resid_grad, 0.0);
    EXPECT_GE(rep.resid_coercive, 0.0);
    EXPECT_GE(rep.resid_positivity, 0.0);
    EXPECT_DOUBLE_EQ(rep.coercivity, 1.0 / 3 + rep.delta_bar / 6);
}

TEST(Trapping, PreconditionViolations) {
    const auto& k = constants();
    EXPECT_ERROR_KIND(trapping_check(e2(5.0), 0.1, k), ErrorKind::not_in_trapping_region);
    // grad below threshold but energy above (1 - delta0) E(Q)
    const double s = std::sqrt(0.95 * k.grad_q_sq / e2_grad);
    const auto u = e2(s);
    ASSERT_LT(norm_report(u).grad_sq, k.grad_q_sq);
    ASSERT_GE(energy(u), 0.9 * k.energy_q);
    EXPECT_ERROR_KIND(trapping_check(u, 0.1, k), ErrorKind::not_in_trapping_region);
}

TEST(Trapping, ProfileTunedToTheEnergyEdge) {
    // s e^{-1.5 r} with E(s u) just below (1 - delta0) E(Q)
    const auto& k = constants();
    const auto shape = sample_exponential(grid(), 1.5, 1.0);
    const double level = 0.9 * k.energy_q * (1 - 1e-6);
    double lo = 0.0, hi = std::sqrt(k.grad_q_sq / grad_sq(shape));
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (energy(shape.scaled(mid)) < level ? lo : hi) = mid;
    }
    const TrappingReport rep = trapping_check(shape.scaled(lo), 0.1, k);
    EXPECT_GE(rep.resid_coercive, 0.0);
    EXPECT_GE(rep.resid_grad, 0.0);
    EXPECT_GE(rep.resid_positivity, 0.0);
}

TEST(Trapping, RandomSuiteResidualsNonNegative) {
    const auto& k = constants();
    suite::Rng rng(17);
    for (int t = 0; t < 100; ++t) {
        const auto u = suite::scale_into_region(suite::smooth_profile(grid(), rng), 0.9, k, rng);
        const TrappingReport rep = trapping_check(u, 0.1, k);
        ASSERT_GE(rep.resid_grad, -1e-8) << t;
        ASSERT_GE(rep.resid_coercive, -1e-8) << t;
        ASSERT_GE(rep.resid_positivity, -1e-8) << t;
        const FunctionalReport f = omega_status(u, k);
        ASSERT_TRUE(f.in_omega);
        ASSERT_GE(f.energy, 0.0);
        ASSERT_GE(*f.j_value, 0.0);
    }
}

TEST(HyperbolicSobolev, RandomSuiteRespectsEuclideanConstant) {
    const auto& k = constants();
    suite::Rng rng(23);
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
        const NormReport n = norm_report(suite::smooth_profile(grid(), rng));
        worst = std::max(worst, std::pow(n.l6_6, 1.0 / 6) / (k.c3 * std::sqrt(n.grad_sq)));
    }
    EXPECT_LE(worst, 1.0 + 1e-3);
}

TEST(SmallData, WorstJStaysNearOneHalf) {
    const auto& k = constants();
    EXPECT_GE(small_data_check(grid(), 1e-3, 1e-2, 100, 1, k), 0.49);
    EXPECT_GE(small_data_check(grid(), 1e-6, 1e-4, 10, 2, k), 0.4999);
    EXPECT_EQ(small_data_check(grid(), 1e-3, 1e-2, 0, 1, k),
              std::numeric_limits<double>::infinity());
    EXPECT_ERROR_KIND(small_data_check(grid(), 2.0, 1e-4, 10, 1, k), ErrorKind::invalid_parameter);
}
