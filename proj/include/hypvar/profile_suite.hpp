#pragma once

// Seeded generators for the random smooth profiles used by the property
// suites and the CLI experiments.

#include <cmath>
#include <cstdint>
#include <random>

#include "hypvar/hyperbolic_radial.hpp"

namespace hypvar::suite {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// sum_j c_j e^{-alpha_j r} with 1..4 terms, alpha_j in [alpha_lo, alpha_hi].
/// Positive mixtures satisfy |u'| >= alpha_lo |u| pointwise.
inline RadialProfile exponential_mixture(const GridPtr& grid, Rng& rng, double alpha_lo,
                                         double alpha_hi, bool positive) {
    const int terms = std::uniform_int_distribution<int>(1, 4)(rng);
    double alpha[4], coeff[4];
    for (int j = 0; j < terms; ++j) {
        alpha[j] = uniform(rng, alpha_lo, alpha_hi);
        coeff[j] = positive ? uniform(rng, 0.1, 1.0) : uniform(rng, -1.0, 1.0);
    }
    return sample(grid, [&](double r) {
        double v = 0.0;
        for (int j = 0; j < terms; ++j) v += coeff[j] * std::exp(-alpha[j] * r);
        return v;
    });
}

/// C^infinity bump exp(1 - 1/(1 - x^2)), x = (r - centre) / half_width.
inline double smooth_bump(double r, double centre, double half_width) {
    const double x = (r - centre) / half_width;
    if (std::abs(x) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

/// A compactly supported bump inside (0, r_max), possibly times a slow oscillation.
inline RadialProfile bump_profile(const GridPtr& grid, Rng& rng, double centre_lo,
                                  double centre_hi) {
    const double centre = uniform(rng, centre_lo, centre_hi);
    const double half_width = uniform(rng, 0.3, std::min(3.0, centre - 0.05));
    const double freq = uniform(rng, 0.0, 2.0);
    const double phase = uniform(rng, 0.0, 6.283185307179586);
    return sample(grid, [&](double r) {
        return smooth_bump(r, centre, half_width) * std::cos(freq * (r - centre) + phase);
    });
}

/// The mixed smooth suite: signed exponential mixtures with alpha in
/// [1.25, 4] or bumps centred in [0.5, 20], at a random amplitude.
inline RadialProfile smooth_profile(const GridPtr& grid, Rng& rng) {
    const double amplitude = std::exp(uniform(rng, std::log(1e-3), std::log(1.0)));
    const bool bump = std::bernoulli_distribution(0.5)(rng);
    RadialProfile u = bump ? bump_profile(grid, rng, 0.5, std::min(20.0, grid->r_max() - 4.0))
                           : exponential_mixture(grid, rng, 1.25, 4.0, false);
    if (u.is_zero()) u = sample_exponential(grid, 2.0, 1.0);
    return u.scaled(amplitude);
}

} // namespace hypvar::suite
