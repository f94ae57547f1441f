#pragma once

// Radial functions on H^3 (and, for the ground-state constants, on R^3):
// grids, quadrature against the volume element, discrete norms, the radial
// Laplacian and a few elementary profile generators.
//
// Discretization
// --------------
// Nodes sit at s_i = (i+1) h, i = 0..n-1, in a uniform coordinate s. For the
// hyperbolic measure s = r; for the Euclidean measure r = s / (1 - s) so that
// slowly decaying integrands (r^-2 tails) stay smooth in s.
//
//   * Mass-type integrals  sum_i w_i g(r_i)          (trapezoid in s)
//   * Dirichlet integral   sum_c a_c (D u)_c^2       (midpoint in s)
//
// where (D u)_c is a fourth-order staggered derivative at the cell midpoint
// s_c = (c + 3/2) h. The radial Laplacian is defined as -W^{-1} D^T A D, so
// it is exactly the L^2(w)-gradient of half the discrete Dirichlet integral:
// summation by parts holds to rounding, and the gradient of J used by the
// descent is the exact derivative of the discrete J.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypvar/error.hpp"

namespace hypvar {

enum class Measure { hyperbolic, euclidean };

inline const char* to_string(Measure m) {
    return m == Measure::hyperbolic ? "hyperbolic" : "euclidean";
}

/// coth via its Laurent series below `cutoff`, where 1/tanh loses digits
/// to cancellation in expressions like coth(r) - 1/r.
inline double stable_coth(double r, double cutoff = 1e-2) {
    if (std::abs(r) < cutoff) {
        const double r2 = r * r;
        return 1.0 / r + r / 3.0 - r * r2 / 45.0 + 2.0 * r * r2 * r2 / 945.0;
    }
    return 1.0 / std::tanh(r);
}

class RadialGrid;
using GridPtr = std::shared_ptr<const RadialGrid>;

class RadialGrid {
public:
    static constexpr double default_hyperbolic_r_max = 30.0;
    static constexpr std::size_t default_hyperbolic_n = 6000;
    static constexpr double default_euclidean_r_max = 1e6;
    static constexpr std::size_t default_euclidean_n = 4000;
    static constexpr std::size_t min_nodes = 16;

    /// Uniform grid r_i = i h, h = r_max / n.
    static GridPtr hyperbolic(double r_max = default_hyperbolic_r_max,
                              std::size_t n = default_hyperbolic_n) {
        validate(r_max, n);
        return GridPtr(new RadialGrid(Measure::hyperbolic, r_max, n));
    }

    /// Mapped grid r = s / (1 - s), s uniform on (0, 1 - delta] with
    /// delta = 1 / (1 + r_max), so the last node lands on r_max.
    static GridPtr euclidean(double r_max = default_euclidean_r_max,
                             std::size_t n = default_euclidean_n) {
        validate(r_max, n);
        return GridPtr(new RadialGrid(Measure::euclidean, r_max, n));
    }

    static GridPtr make(double r_max, std::size_t n, Measure m) {
        return m == Measure::hyperbolic ? hyperbolic(r_max, n) : euclidean(r_max, n);
    }

    Measure measure() const noexcept { return measure_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t cells() const noexcept { return cell_coeff_.size(); }
    double r_max() const noexcept { return nodes_.back(); }
    /// Step of the uniform coordinate (equals the r-step on hyperbolic grids).
    double step() const noexcept { return step_; }

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<const double> cell_radii() const noexcept { return cell_radii_; }
    std::span<const double> cell_coefficients() const noexcept { return cell_coeff_; }

    /// Volume density 4 pi m(r) of the grid's measure.
    double density(double r) const {
        const double m = measure_ == Measure::hyperbolic ? std::sinh(r) : r;
        return 4.0 * std::numbers::pi * m * m;
    }

    /// Fourth-order staggered derivative d/ds at every cell midpoint.
    std::vector<double> cell_derivative(std::span<const double> u) const {
        const std::size_t n = size();
        std::vector<double> du(n - 1);
        for (std::size_t c = 0; c + 1 < n; ++c) {
            const auto [first, coeff] = stencil(c);
            double acc = 0.0;
            for (std::size_t k = 0; k < 4; ++k) acc += coeff[k] * u[first + k];
            du[c] = acc / (24.0 * step_);
        }
        return du;
    }

    /// out += D^T q.
    void add_cell_derivative_transpose(std::span<const double> q, std::span<double> out) const {
        for (std::size_t c = 0; c < q.size(); ++c) {
            const auto [first, coeff] = stencil(c);
            const double qc = q[c] / (24.0 * step_);
            for (std::size_t k = 0; k < 4; ++k) out[first + k] += coeff[k] * qc;
        }
    }

private:
    RadialGrid(Measure m, double r_max, std::size_t n) : measure_(m) {
        nodes_.resize(n);
        weights_.resize(n);
        cell_radii_.resize(n - 1);
        cell_coeff_.resize(n - 1);
        if (m == Measure::hyperbolic) {
            step_ = r_max / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                nodes_[i] = static_cast<double>(i + 1) * step_;
                weights_[i] = density(nodes_[i]) * step_;
            }
            nodes_.back() = r_max;
            for (std::size_t c = 0; c + 1 < n; ++c) {
                cell_radii_[c] = (static_cast<double>(c) + 1.5) * step_;
                cell_coeff_[c] = density(cell_radii_[c]) * step_;
            }
        } else {
            const double delta = 1.0 / (1.0 + r_max);
            step_ = (1.0 - delta) / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double s = static_cast<double>(i + 1) * step_;
                const double one_minus = 1.0 - s;
                nodes_[i] = s / one_minus;
                weights_[i] = density(nodes_[i]) / (one_minus * one_minus) * step_;
            }
            nodes_.back() = r_max;
            for (std::size_t c = 0; c + 1 < n; ++c) {
                const double s = (static_cast<double>(c) + 1.5) * step_;
                const double one_minus = 1.0 - s;
                cell_radii_[c] = s / one_minus;
                cell_coeff_[c] = density(cell_radii_[c]) * one_minus * one_minus * step_;
            }
        }
        weights_.back() *= 0.5;
    }

    static void validate(double r_max, std::size_t n) {
        if (!(r_max > 0.0) || !std::isfinite(r_max))
            throw Error(ErrorKind::invalid_parameter, "grid r_max must be positive and finite");
        if (n < min_nodes)
            throw Error(ErrorKind::invalid_parameter,
                        "grid needs at least " + std::to_string(min_nodes) + " nodes");
    }

    // Cell c spans nodes c and c+1; one-sided stencils on the two end cells.
    std::pair<std::size_t, const std::array<double, 4>&> stencil(std::size_t c) const {
        static constexpr std::array<double, 4> left{-23.0, 21.0, 3.0, -1.0};
        static constexpr std::array<double, 4> centre{1.0, -27.0, 27.0, -1.0};
        static constexpr std::array<double, 4> right{1.0, -3.0, -21.0, 23.0};
        const std::size_t n = size();
        if (c == 0) return {0, left};
        if (c + 2 == n) return {n - 4, right};
        return {c - 1, centre};
    }

    Measure measure_;
    double step_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> cell_radii_;
    std::vector<double> cell_coeff_;
};

/// A real radial function sampled on the nodes of one grid.
class RadialProfile {
public:
    RadialProfile(GridPtr grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (!grid_) throw Error(ErrorKind::invalid_parameter, "profile needs a grid");
        if (values_.size() != grid_->size())
            throw Error(ErrorKind::invalid_parameter, "profile size does not match its grid");
        for (double v : values_)
            if (!std::isfinite(v))
                throw Error(ErrorKind::invalid_parameter, "profile values must be finite");
    }

    static RadialProfile zero(GridPtr grid) {
        const std::size_t n = grid->size();
        return RadialProfile(std::move(grid), std::vector<double>(n, 0.0));
    }

    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const RadialGrid& grid() const noexcept { return *grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    bool is_zero() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
    }

    bool same_grid(const RadialProfile& other) const noexcept { return grid_ == other.grid_; }

    RadialProfile scaled(double c) const {
        std::vector<double> out(values_);
        for (double& v : out) v *= c;
        return RadialProfile(grid_, std::move(out));
    }

    /// this + t * other.
    RadialProfile axpy(double t, const RadialProfile& other) const {
        require_same_grid(other);
        std::vector<double> out(values_);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += t * other.values_[i];
        return RadialProfile(grid_, std::move(out));
    }

    friend RadialProfile operator+(const RadialProfile& a, const RadialProfile& b) {
        return a.axpy(1.0, b);
    }
    friend RadialProfile operator-(const RadialProfile& a, const RadialProfile& b) {
        return a.axpy(-1.0, b);
    }

    void require_same_grid(const RadialProfile& other) const {
        if (!same_grid(other))
            throw Error(ErrorKind::invalid_pair, "profiles live on different grids");
    }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Samples f(r) at every node.
template <class F>
RadialProfile sample(const GridPtr& grid, F&& f) {
    std::vector<double> v(grid->size());
    const auto r = grid->nodes();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(r[i]);
    return RadialProfile(grid, std::move(v));
}

/// sum_i w_i g(r_i, u_i).
template <class F>
double integrate(const RadialProfile& u, F&& g) {
    const auto r = u.grid().nodes();
    const auto w = u.grid().weights();
    const auto v = u.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * g(r[i], v[i]);
    return acc;
}

struct NormReport {
    double l2_sq = 0.0;
    double l6_6 = 0.0;
    double grad_sq = 0.0;
    double h1_sq = 0.0;
};

inline double l2_sq(const RadialProfile& u) {
    return integrate(u, [](double, double x) { return x * x; });
}

inline double l2_inner(const RadialProfile& u, const RadialProfile& v) {
    u.require_same_grid(v);
    const auto w = u.grid().weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += w[i] * u[i] * v[i];
    return acc;
}

inline double grad_sq(const RadialProfile& u) {
    const auto du = u.grid().cell_derivative(u.values());
    const auto a = u.grid().cell_coefficients();
    double acc = 0.0;
    for (std::size_t c = 0; c < du.size(); ++c) acc += a[c] * du[c] * du[c];
    return acc;
}

inline NormReport norm_report(const RadialProfile& u) {
    NormReport rep;
    const auto w = u.grid().weights();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x2 = u[i] * u[i];
        rep.l2_sq += w[i] * x2;
        rep.l6_6 += w[i] * x2 * x2 * x2;
    }
    rep.grad_sq = grad_sq(u);
    rep.h1_sq = rep.grad_sq + rep.l2_sq;
    return rep;
}

/// Discrete u'' + 2 coth(r) u' (hyperbolic) or u'' + (2/r) u' (Euclidean),
/// in conservative form: -W^{-1} D^T A D u.
inline RadialProfile radial_laplacian(const RadialProfile& u) {
    const RadialGrid& g = u.grid();
    auto flux = g.cell_derivative(u.values());
    const auto a = g.cell_coefficients();
    for (std::size_t c = 0; c < flux.size(); ++c) flux[c] *= a[c];
    std::vector<double> out(u.size(), 0.0);
    g.add_cell_derivative_transpose(flux, out);
    const auto w = g.weights();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i] / w[i];
    return RadialProfile(u.grid_ptr(), std::move(out));
}

/// ||grad u||^2 / ||u||^2; bounded below by 1 on H^3.
inline double rayleigh_quotient(const RadialProfile& u) {
    const NormReport n = norm_report(u);
    if (!(n.l2_sq > 0.0))
        throw Error(ErrorKind::division_undefined, "Rayleigh quotient of the zero profile");
    return n.grad_sq / n.l2_sq;
}

inline RadialProfile sample_exponential(const GridPtr& grid, double alpha, double scale) {
    if (!(alpha > 1.0))
        throw Error(ErrorKind::invalid_parameter,
                    "exponential profile needs alpha > 1 to lie in H^1(H^3)");
    return sample(grid, [&](double r) { return scale * std::exp(-alpha * r); });
}

struct HardyResult {
    double constant = 0.0; // max_{r_i >= 10} |u(r_i)| e^{3 r_i / 4} at unit H^1 norm
    double worst_r = 0.0;
};

inline constexpr double hardy_radius = 10.0;
inline constexpr double hardy_rate = 0.75;

/// Pointwise exponential decay of radial H^1 functions beyond r = 10.
inline HardyResult hardy_check(const RadialProfile& u) {
    const RadialGrid& g = u.grid();
    if (g.r_max() < hardy_radius)
        throw Error(ErrorKind::insufficient_domain, "Hardy check needs r_max >= 10");
    const auto r = g.nodes();
    const auto first = std::lower_bound(r.begin(), r.end(), hardy_radius) - r.begin();
    HardyResult res{0.0, r[static_cast<std::size_t>(first)]};
    const double h1 = norm_report(u).h1_sq;
    if (!(h1 > 0.0)) return res;
    const double scale = 1.0 / std::sqrt(h1);
    for (auto i = static_cast<std::size_t>(first); i < r.size(); ++i) {
        const double c = std::abs(u[i]) * scale * std::exp(hardy_rate * r[i]);
        if (c > res.constant) res = {c, r[i]};
    }
    return res;
}

/// Closed form of 4 pi int_0^inf e^{-2 alpha r} sinh^2 r dr, alpha > 1.
inline double exponential_l2_sq_exact(double alpha) {
    return std::numbers::pi
           * (1.0 / (2.0 * alpha - 2.0) + 1.0 / (2.0 * alpha + 2.0) - 1.0 / alpha);
}

} // namespace hypvar
