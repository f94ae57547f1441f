#pragma once

// The Euclidean ground state W(r) = (1 + r^2/3)^{-1/2}, the positive radial
// solution of Delta W + W^5 = 0 on R^3, and the constants derived from it.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

#include "hypvar/error.hpp"
#include "hypvar/hyperbolic_radial.hpp"

namespace hypvar {

struct GroundStateConstants {
    double c3 = 0.0;        // sharp Sobolev constant, ||u||_6 <= c3 ||grad u||_2
    double grad_q_sq = 0.0; // ||grad Q||^2_{L^2(R^3)}
    double energy_q = 0.0;  // E_{R^3}(Q)
    double q_l6_6 = 0.0;    // ||Q||^6_{L^6(R^3)}
};

namespace ground_state {

inline double eval_q(double r) {
    if (!(r >= 0.0)) throw Error(ErrorKind::invalid_parameter, "ground state needs r >= 0");
    return 1.0 / std::sqrt(1.0 + r * r / 3.0);
}

inline double eval_q_prime(double r) {
    const double a = 1.0 + r * r / 3.0;
    return -(r / 3.0) / (a * std::sqrt(a));
}

inline double eval_q_second(double r) {
    const double a = 1.0 + r * r / 3.0;
    const double a32 = a * std::sqrt(a);
    return -1.0 / (3.0 * a32) + (r * r / 3.0) / (a32 * a);
}

/// max |W'' + (2/r) W' + W^5| over the radii; 0 for an empty list.
inline double verify_q_residual(std::span<const double> radii) {
    double worst = 0.0;
    for (double r : radii) {
        const double w = eval_q(r);
        const double w2 = w * w;
        const double res = eval_q_second(r) + 2.0 * eval_q_prime(r) / r + w2 * w2 * w;
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

/// 3 sqrt(3) pi^2 / 4, from 4 sqrt(3) pi * int t^4 (1+t^2)^{-3} dt = 4 sqrt(3) pi * 3 pi / 16.
inline double grad_q_sq_closed_form() {
    return 3.0 * std::numbers::sqrt3 * std::numbers::pi * std::numbers::pi / 4.0;
}

/// Ground-state thresholds by quadrature of the closed form on a Euclidean grid.
inline GroundStateConstants compute_constants(const RadialGrid& grid) {
    if (grid.measure() != Measure::euclidean)
        throw Error(ErrorKind::wrong_measure, "ground-state constants need a Euclidean grid");
    const auto r = grid.nodes();
    const auto w = grid.weights();
    GroundStateConstants k;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double q = eval_q(r[i]);
        const double dq = eval_q_prime(r[i]);
        const double q2 = q * q;
        k.grad_q_sq += w[i] * dq * dq;
        k.q_l6_6 += w[i] * q2 * q2 * q2;
    }
    k.c3 = std::pow(k.q_l6_6, 1.0 / 6.0) / std::sqrt(k.grad_q_sq);
    k.energy_q = k.grad_q_sq / 2.0 - k.q_l6_6 / 6.0;
    return k;
}

inline GroundStateConstants default_constants() {
    static const GroundStateConstants k = compute_constants(*RadialGrid::euclidean());
    return k;
}

} // namespace ground_state
} // namespace hypvar
