#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hypvar/hyperbolic_radial.hpp"
#include "hypvar/profile_suite.hpp"
#include "test_support.hpp"

using namespace hypvar;

namespace {

const GridPtr& default_grid() {
    static const GridPtr g = RadialGrid::hyperbolic();
    return g;
}

// 4 pi int_0^inf e^{-2 alpha r} sinh^2 r dr, written out from
// sinh^2 r = (e^{2r} - 2 + e^{-2r}) / 4.
double exp_mass(double alpha) {
    return 4.0 * std::numbers::pi * 0.25
           * (1.0 / (2 * alpha - 2) - 2.0 / (2 * alpha) + 1.0 / (2 * alpha + 2));
}

} // namespace

TEST(RadialGrid, UniformSpacing) {
    const auto& g = *default_grid();
    EXPECT_EQ(g.size(), 6000u);
    EXPECT_DOUBLE_EQ(g.step(), 0.005);
    EXPECT_DOUBLE_EQ(g.nodes().front(), 0.005);
    EXPECT_DOUBLE_EQ(g.nodes().back(), 30.0);
    for (std::size_t i = 1; i < g.size(); ++i) ASSERT_GT(g.nodes()[i], g.nodes()[i - 1]);
    for (double w : g.weights()) ASSERT_GT(w, 0.0);
}

TEST(RadialGrid, EuclideanMappingIsMonotoneAndReachesRMax) {
    const auto g = RadialGrid::euclidean();
    EXPECT_EQ(g->measure(), Measure::euclidean);
    EXPECT_DOUBLE_EQ(g->nodes().back(), 1e6);
    for (std::size_t i = 1; i < g->size(); ++i) ASSERT_GT(g->nodes()[i], g->nodes()[i - 1]);
    for (double w : g->weights()) ASSERT_GT(w, 0.0);
    // 4 pi int r^2 e^{-r} dr = 8 pi
    const auto u = sample(g, [](double r) { return std::exp(-r / 2); });
    EXPECT_LT(oracle::rel_err(l2_sq(u), 8 * std::numbers::pi), 1e-6);
}

TEST(RadialGrid, RejectsBadParameters) {
    EXPECT_ERROR_KIND(RadialGrid::hyperbolic(0.0, 100), ErrorKind::invalid_parameter);
    EXPECT_ERROR_KIND(RadialGrid::hyperbolic(-3.0, 100), ErrorKind::invalid_parameter);
    EXPECT_ERROR_KIND(RadialGrid::hyperbolic(30.0, 8), ErrorKind::invalid_parameter);
    EXPECT_ERROR_KIND(RadialGrid::euclidean(std::nan(""), 100), ErrorKind::invalid_parameter);
}

TEST(RadialGrid, QuadratureOfExpMinusFourR) {
    const auto u = sample(default_grid(), [](double r) { return std::exp(-2 * r); });
    EXPECT_LT(oracle::rel_err(l2_sq(u), std::numbers::pi / 6), 1e-6);
}

class QuadratureExactness : public ::testing::TestWithParam<double> {};

TEST_P(QuadratureExactness, MatchesClosedFormAndAdaptiveOracle) {
    const double alpha = GetParam();
    // e^{-2 alpha r} sinh^2 r = e^{-(2 alpha - 2) r} (1 - e^{-2r})^2 / 4, finite for all r
    const double numeric = oracle::half_line([&](double r) {
        const double t = -std::expm1(-2 * r);
        return std::numbers::pi * std::exp(-(2 * alpha - 2) * r) * t * t;
    });
    EXPECT_LT(oracle::rel_err(numeric, exp_mass(alpha)), 1e-10);
    EXPECT_LT(oracle::rel_err(exponential_l2_sq_exact(alpha), exp_mass(alpha)), 1e-14);
    const auto u = sample_exponential(default_grid(), alpha, 1.0);
    EXPECT_LT(oracle::rel_err(l2_sq(u), exp_mass(alpha)), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Alphas, QuadratureExactness, ::testing::Values(1.5, 2.0, 3.0));

TEST(NormReport, ExponentialProfile) {
    const auto u = sample_exponential(default_grid(), 2.0, 1.0);
    const NormReport n = norm_report(u);
    EXPECT_LT(oracle::rel_err(n.l2_sq, std::numbers::pi / 6), 1e-6);
    EXPECT_LT(oracle::rel_err(n.grad_sq, 4 * n.l2_sq), 1e-4);
    EXPECT_EQ(n.h1_sq, n.grad_sq + n.l2_sq);
    // 4 pi int e^{-12 r} sinh^2 r dr
    EXPECT_LT(oracle::rel_err(n.l6_6, exp_mass(6.0)), 1e-6);
}

TEST(NormReport, ZeroProfile) {
    const NormReport n = norm_report(RadialProfile::zero(default_grid()));
    EXPECT_EQ(n.l2_sq, 0.0);
    EXPECT_EQ(n.l6_6, 0.0);
    EXPECT_EQ(n.grad_sq, 0.0);
    EXPECT_EQ(n.h1_sq, 0.0);
}

TEST(NormReport, DirichletIntegralOfBumpMatchesAdaptiveQuadrature) {
    // u = e^{-(r-4)^2}: u' = -2 (r-4) u
    const auto u = sample(default_grid(), [](double r) { return std::exp(-(r - 4) * (r - 4)); });
    const double want = oracle::interval(
        [](double r) {
            const double d = -2 * (r - 4) * std::exp(-(r - 4) * (r - 4));
            return d * d * oracle::hyperbolic_density(r);
        },
        0.0, 30.0);
    EXPECT_LT(oracle::rel_err(grad_sq(u), want), 1e-8);
}

TEST(NormReport, ScalingIsHomogeneous) {
    suite::Rng rng(11);
    for (int t = 0; t < 20; ++t) {
        const auto u = suite::smooth_profile(default_grid(), rng);
        const NormReport n = norm_report(u);
        for (double c : {0.1, 3.0, -2.0}) {
            const NormReport m = norm_report(u.scaled(c));
            EXPECT_LT(oracle::rel_err(m.l2_sq, c * c * n.l2_sq), 1e-12);
            EXPECT_LT(oracle::rel_err(m.l6_6, std::pow(c, 6) * n.l6_6), 1e-12);
            EXPECT_LT(oracle::rel_err(m.grad_sq, c * c * n.grad_sq), 1e-12);
        }
    }
}

TEST(RadialLaplacian, ExponentialMatchesSymbolicDerivative) {
    const auto u = sample_exponential(default_grid(), 2.0, 1.0);
    const auto lap = radial_laplacian(u);
    const auto r = default_grid()->nodes();
    double worst = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < 0.2 || r[i] > 25.0) continue;
        const double exact = (4.0 - 4.0 / std::tanh(r[i])) * std::exp(-2 * r[i]);
        worst = std::max(worst, std::abs(lap[i] - exact));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(RadialLaplacian, ConstantHasZeroLaplacianInTheInterior) {
    const auto u = sample(default_grid(), [](double) { return 1.0; });
    const auto lap = radial_laplacian(u);
    for (std::size_t i = 3; i + 3 < u.size(); ++i) ASSERT_NEAR(lap[i], 0.0, 1e-9) << i;
}

TEST(RadialLaplacian, EvenProfileIsFiniteNearTheOrigin) {
    // u = sech r, an even function; u'' + 2 coth r u' is smooth at 0 with value -3.
    const auto g = default_grid();
    const auto u = sample(g, [](double r) { return 1.0 / std::cosh(r); });
    const auto lap = radial_laplacian(u);
    auto exact = [](double r) {
        const double s = 1.0 / std::cosh(r), t = std::tanh(r);
        return s * (t * t - s * s) - 2.0 * stable_coth(r) * s * t;
    };
    EXPECT_TRUE(std::isfinite(lap[0]));
    EXPECT_LT(std::abs(lap[0]), 10.0);
    for (std::size_t i = 4; i < 400; ++i) ASSERT_NEAR(lap[i], exact(g->nodes()[i]), 1e-4) << i;
    EXPECT_NEAR(exact(1e-6), -3.0, 1e-9);
}

TEST(RadialLaplacian, SummationByPartsOnCompactSupport) {
    suite::Rng rng(5);
    const auto g = default_grid();
    for (int t = 0; t < 20; ++t) {
        const auto u = suite::bump_profile(g, rng, 2.0, 20.0);
        const double lhs = -l2_inner(radial_laplacian(u), u);
        EXPECT_LT(oracle::rel_err(lhs, grad_sq(u)), 1e-3);
    }
}

TEST(Rayleigh, ExponentialIdentity) {
    for (double alpha : {1.25, 1.5, 2.0})
        EXPECT_NEAR(rayleigh_quotient(sample_exponential(default_grid(), alpha, 1.0)),
                    alpha * alpha, 1e-4)
            << alpha;
    EXPECT_NEAR(rayleigh_quotient(sample_exponential(default_grid(), 1.01, 1.0)), 1.0201, 1e-3);
}

TEST(Rayleigh, ZeroProfileIsUndefined) {
    EXPECT_ERROR_KIND(rayleigh_quotient(RadialProfile::zero(default_grid())),
                      ErrorKind::division_undefined);
}

TEST(Rayleigh, SpectralGapOnRandomSuite) {
    suite::Rng rng(2024);
    double worst = 1e300;
    for (int t = 0; t < 200; ++t)
        worst = std::min(worst, rayleigh_quotient(suite::smooth_profile(default_grid(), rng)));
    EXPECT_GE(worst, 1.0 - 1e-3);
}

TEST(SampleExponential, RejectsNonIntegrableRates) {
    EXPECT_ERROR_KIND(sample_exponential(default_grid(), 0.5, 1.0), ErrorKind::invalid_parameter);
    EXPECT_ERROR_KIND(sample_exponential(default_grid(), 1.0, 1.0), ErrorKind::invalid_parameter);
}

TEST(Hardy, ExponentialAttainsAtTen) {
    const auto u = sample_exponential(default_grid(), 2.0, 1.0);
    const HardyResult h = hardy_check(u);
    EXPECT_NEAR(h.worst_r, 10.0, 1e-12);
    const double want = std::exp(-2.0 * 10.0 + 7.5) / std::sqrt(norm_report(u).h1_sq);
    EXPECT_LT(oracle::rel_err(h.constant, want), 1e-12);
}

TEST(Hardy, ZeroAndShortDomain) {
    EXPECT_EQ(hardy_check(RadialProfile::zero(default_grid())).constant, 0.0);
    const auto short_grid = RadialGrid::hyperbolic(5.0, 1000);
    EXPECT_ERROR_KIND(hardy_check(sample_exponential(short_grid, 2.0, 1.0)),
                      ErrorKind::insufficient_domain);
}

TEST(RadialProfile, ValidatesValuesAndGrids) {
    const auto g = default_grid();
    std::vector<double> bad(g->size(), 0.0);
    bad[7] = std::numeric_limits<double>::infinity();
    EXPECT_ERROR_KIND(RadialProfile(g, bad), ErrorKind::invalid_parameter);
    EXPECT_ERROR_KIND(RadialProfile(g, std::vector<double>(3, 0.0)), ErrorKind::invalid_parameter);
    const auto other = RadialGrid::hyperbolic();
    EXPECT_ERROR_KIND(RadialProfile::zero(g) + RadialProfile::zero(other),
                      ErrorKind::invalid_pair);
}

TEST(StableCoth, SeriesAgreesWithDirectFormulaAtCutoff) {
    for (double r : {1e-2, 9.99e-3, 5e-3}) {
        const double direct = std::cosh(r) / std::sinh(r);
        EXPECT_LT(oracle::rel_err(stable_coth(r), direct), 1e-13) << r;
    }
}
