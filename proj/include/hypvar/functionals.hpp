#pragma once

// E_{H^3}, the objective J = E / ||u||^2, membership in the constraint set
// Omega = { u != 0 : ||grad u||_2 < ||grad Q||_2, E(u) < E_{R^3}(Q) }, and
// the quantitative inequalities that hold inside it.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "hypvar/error.hpp"
#include "hypvar/ground_state.hpp"
#include "hypvar/hyperbolic_radial.hpp"
#include "hypvar/profile_suite.hpp"

namespace hypvar {

struct FunctionalReport {
    NormReport norms;
    double energy = 0.0;
    std::optional<double> j_value; // empty for the zero profile
    bool in_omega = false;
    double grad_margin = 0.0;   // ||grad Q|| - ||grad u||
    double energy_margin = 0.0; // E(Q) - E(u)
};

struct TrappingReport {
    double delta0 = 0.0;
    double delta_bar = 0.0;
    double coercivity = 0.0;       // 1/3 + delta_bar/6
    double resid_grad = 0.0;       // (1 - delta_bar) ||grad Q||^2 - ||grad u||^2
    double resid_coercive = 0.0;   // (||grad u||^2 - ||u||_6^6) - delta_bar ||grad u||^2
    double resid_positivity = 0.0; // E(u) - coercivity ||grad u||^2
};

inline double energy(const NormReport& n) { return n.grad_sq / 2.0 - n.l6_6 / 6.0; }

inline double energy(const RadialProfile& u) { return energy(norm_report(u)); }

inline double j_value(const NormReport& n) {
    if (!(n.l2_sq > 0.0)) throw Error(ErrorKind::division_undefined, "J of the zero profile");
    return energy(n) / n.l2_sq;
}

inline double j_value(const RadialProfile& u) { return j_value(norm_report(u)); }

inline FunctionalReport omega_status(const NormReport& n, const GroundStateConstants& k) {
    FunctionalReport rep;
    rep.norms = n;
    rep.energy = energy(n);
    if (n.l2_sq > 0.0) rep.j_value = rep.energy / n.l2_sq;
    rep.grad_margin = std::sqrt(k.grad_q_sq) - std::sqrt(n.grad_sq);
    rep.energy_margin = k.energy_q - rep.energy;
    rep.in_omega = rep.j_value.has_value() && rep.grad_margin > 0.0 && rep.energy_margin > 0.0;
    return rep;
}

inline FunctionalReport omega_status(const RadialProfile& u, const GroundStateConstants& k) {
    return omega_status(norm_report(u), k);
}

namespace detail {

// The two scalar facts behind energy trapping, with y = ||grad u||^2:
//   E(u) >= f1(y) = y/2 - C^6 y^3 / 6,  f1 increasing on (0, ||grad Q||^2)
//   ||grad u||^2 - ||u||_6^6 >= g1(y) = y - C^6 y^3
inline double trap_f1(double y, double c6) { return 0.5 * y - c6 * y * y * y / 6.0; }
inline double trap_g1(double y, double c6) { return y - c6 * y * y * y; }

} // namespace detail

/// Largest delta_bar (bisected to 1e-12) such that, for every u with
/// ||grad u||^2 < ||grad Q||^2 and E(u) < (1 - delta0) E(Q),
///   ||grad u||^2 <= (1 - delta_bar) ||grad Q||^2  and
///   g1(y) >= delta_bar y on that range.
inline double trapping_delta_bar(double delta0, const GroundStateConstants& k) {
    if (!(delta0 > 0.0 && delta0 < 1.0))
        throw Error(ErrorKind::invalid_parameter, "delta0 must lie in (0, 1)");
    const double c6 = std::pow(k.c3, 6);
    const double g = k.grad_q_sq;
    const double level = (1.0 - delta0) * k.energy_q;
    auto holds = [&](double d) {
        const double y = (1.0 - d) * g;
        return detail::trap_f1(y, c6) >= level && detail::trap_g1(y, c6) >= d * y;
    };
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (holds(mid) ? lo : hi) = mid;
    }
    return lo;
}

inline TrappingReport trapping_check(const RadialProfile& u, double delta0,
                                     const GroundStateConstants& k) {
    const NormReport n = norm_report(u);
    const double e = energy(n);
    if (!(n.grad_sq < k.grad_q_sq) || !(e < (1.0 - delta0) * k.energy_q))
        throw Error(ErrorKind::not_in_trapping_region,
                    "profile violates ||grad u||^2 < ||grad Q||^2 or E(u) < (1-delta0) E(Q)");
    TrappingReport rep;
    rep.delta0 = delta0;
    rep.delta_bar = trapping_delta_bar(delta0, k);
    rep.coercivity = 1.0 / 3.0 + rep.delta_bar / 6.0;
    rep.resid_grad = (1.0 - rep.delta_bar) * k.grad_q_sq - n.grad_sq;
    rep.resid_coercive = (n.grad_sq - n.l6_6) - rep.delta_bar * n.grad_sq;
    rep.resid_positivity = e - rep.coercivity * n.grad_sq;
    return rep;
}

namespace suite {

/// Rescales a nonzero shape to c * shape with ||grad||^2 < ||grad Q||^2 and
/// E < level_fraction * E(Q), c^2 drawn uniformly in (0.05, 1) times the
/// largest admissible value along the ray.
inline RadialProfile scale_into_region(const RadialProfile& shape, double level_fraction,
                                       const GroundStateConstants& k, Rng& rng) {
    const NormReport n = norm_report(shape);
    if (!(n.grad_sq > 0.0)) throw Error(ErrorKind::invalid_parameter, "shape has no gradient");
    const double level = level_fraction * k.energy_q;
    // along the ray, y = c^2: grad = y a, E(y) = y a / 2 - y^3 b / 6
    auto admissible = [&](double y) {
        return y * n.grad_sq < k.grad_q_sq && 0.5 * y * n.grad_sq - y * y * y * n.l6_6 / 6.0 < level;
    };
    double lo = 0.0, hi = k.grad_q_sq / n.grad_sq;
    while (hi - lo > 1e-13 * hi) {
        const double mid = 0.5 * (lo + hi);
        (admissible(mid) ? lo : hi) = mid;
    }
    const double y = uniform(rng, 0.05, 1.0) * lo;
    return shape.scaled(std::sqrt(y));
}

} // namespace suite

/// Minimum J over `trials` random positive exponential mixtures
/// (alpha in (1, 4]) rescaled to ||u||_{H^1} = epsilon. Small data sees
/// only the quadratic part of J, so the result stays above 1/2 - sigma.
inline double small_data_check(const GridPtr& grid, double epsilon, double sigma,
                               std::size_t trials, std::uint64_t seed,
                               const GroundStateConstants& k) {
    if (!(epsilon > 0.0) || !(sigma > 0.0))
        throw Error(ErrorKind::invalid_parameter, "epsilon and sigma must be positive");
    const double eps2 = epsilon * epsilon;
    if (!(std::pow(k.c3, 6) * eps2 * eps2 < 6.0 * sigma))
        throw Error(ErrorKind::invalid_parameter, "epsilon too large: need C3^6 eps^4 < 6 sigma");
    suite::Rng rng(seed);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
        const RadialProfile shape =
            suite::exponential_mixture(grid, rng, std::nextafter(1.0, 2.0), 4.0, true);
        const RadialProfile u = shape.scaled(epsilon / std::sqrt(norm_report(shape).h1_sq));
        worst = std::min(worst, j_value(u));
    }
    return worst;
}

} // namespace hypvar
