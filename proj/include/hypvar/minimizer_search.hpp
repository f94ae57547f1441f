#pragma once

// Numerical side of inf_{Omega} J = 1/2: explicit minimizing sequences,
// constrained descent on J, dyadic mass diagnostics and the pigeonhole
// decomposition through a low-mass annulus.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hypvar/error.hpp"
#include "hypvar/functionals.hpp"
#include "hypvar/ground_state.hpp"
#include "hypvar/hyperbolic_radial.hpp"

namespace hypvar {

// ---------------------------------------------------------------------------
// Minimizing sequence

struct SequenceElement {
    int k = 0;
    double alpha = 0.0;
    double amplitude = 0.0;
    RadialProfile profile;
    FunctionalReport report;
};

/// u_k = eps0 2^{-k} e^{-(1 + 2^{-k}) r}, k = 1..k_max. J(u_k) = alpha_k^2/2 + O(eps_k^4).
inline std::vector<SequenceElement> minimizing_sequence(const GridPtr& grid, int k_max, double eps0,
                                                        const GroundStateConstants& k) {
    if (!(eps0 > 0.0)) throw Error(ErrorKind::invalid_parameter, "eps0 must be positive");
    std::vector<SequenceElement> out;
    for (int i = 1; i <= k_max; ++i) {
        const double alpha = 1.0 + std::ldexp(1.0, -i);
        const double amp = eps0 * std::ldexp(1.0, -i);
        RadialProfile u = sample_exponential(grid, alpha, amp);
        FunctionalReport rep = omega_status(u, k);
        out.push_back({i, alpha, amp, std::move(u), rep});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gradient of J

/// L^2(H^3) gradient (-Delta u - u^5 - 2 J(u) u) / ||u||^2 of the discrete J.
/// At a critical point this is Delta u + u^5 + lambda u = 0 with lambda = 2 J.
inline RadialProfile j_gradient(const RadialProfile& u) {
    const NormReport n = norm_report(u);
    if (!(n.l2_sq > 0.0))
        throw Error(ErrorKind::division_undefined, "gradient of J at the zero profile");
    const double j = j_value(n);
    const RadialProfile lap = radial_laplacian(u);
    std::vector<double> g(u.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = u[i];
        const double x2 = x * x;
        g[i] = (-lap[i] - x2 * x2 * x - 2.0 * j * x) / n.l2_sq;
    }
    return RadialProfile(u.grid_ptr(), std::move(g));
}

// ---------------------------------------------------------------------------
// Dyadic annulus histogram

struct AnnulusHistogram {
    std::vector<double> bin_lo; // bins [2^j, 2^{j+1}); the first bin is widened down to 0
    std::vector<double> bin_hi;
    std::vector<double> l2_share;
    std::vector<double> grad_share;
    std::vector<double> l6_share;

    std::size_t size() const noexcept { return bin_lo.size(); }

    /// Index of the bin holding the median of the L^2 mass.
    std::size_t median_bin() const {
        double acc = 0.0;
        for (std::size_t b = 0; b < l2_share.size(); ++b) {
            acc += l2_share[b];
            if (acc >= 0.5) return b;
        }
        return l2_share.empty() ? 0 : l2_share.size() - 1;
    }

    /// L^2-share-weighted mean dyadic level.
    double mean_level() const {
        double acc = 0.0;
        for (std::size_t b = 0; b < l2_share.size(); ++b)
            acc += l2_share[b] * std::log2(bin_hi[b]);
        return acc;
    }
};

inline AnnulusHistogram annulus_histogram(const RadialProfile& u) {
    const RadialGrid& g = u.grid();
    const auto r = g.nodes();
    const int lo = static_cast<int>(std::floor(std::log2(r.front())));
    const int hi = static_cast<int>(std::floor(std::log2(r.back())));
    const auto nb = static_cast<std::size_t>(hi - lo + 1);
    auto bin_of = [&](double x) {
        const int j = std::clamp(static_cast<int>(std::floor(std::log2(x))), lo, hi);
        return static_cast<std::size_t>(j - lo);
    };
    AnnulusHistogram h;
    h.l2_share.assign(nb, 0.0);
    h.grad_share.assign(nb, 0.0);
    h.l6_share.assign(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        const int j = lo + static_cast<int>(b);
        h.bin_lo.push_back(b == 0 ? 0.0 : std::ldexp(1.0, j));
        h.bin_hi.push_back(std::ldexp(1.0, j + 1));
    }
    const auto w = g.weights();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x2 = u[i] * u[i];
        h.l2_share[bin_of(r[i])] += w[i] * x2;
        h.l6_share[bin_of(r[i])] += w[i] * x2 * x2 * x2;
    }
    const auto du = g.cell_derivative(u.values());
    const auto a = g.cell_coefficients();
    const auto rc = g.cell_radii();
    for (std::size_t c = 0; c < du.size(); ++c) h.grad_share[bin_of(rc[c])] += a[c] * du[c] * du[c];

    auto normalize = [](std::vector<double>& v) {
        double total = 0.0;
        for (double x : v) total += x;
        if (total > 0.0)
            for (double& x : v) x /= total;
        return total;
    };
    if (!(normalize(h.l2_share) > 0.0))
        throw Error(ErrorKind::division_undefined, "annulus histogram of the zero profile");
    normalize(h.grad_share);
    normalize(h.l6_share);
    return h;
}

// ---------------------------------------------------------------------------
// Constrained descent

struct DescentOptions {
    std::size_t max_steps = 2000;
    double step0 = 1e-5;      // step in units of ||u||^2 g, i.e. on the first variation
    double tol = 1e-10;       // stop when ||g|| ||u|| < tol
    double min_step = 1e-30;  // step underflow
    std::size_t checkpoint_every = 250;
};

struct DescentIterate {
    std::size_t step = 0;
    double j_value = 0.0;
    double l2_sq = 0.0;
    double grad_sq = 0.0;
    bool in_omega = false;
    std::size_t boundary_backtracks = 0;
};

enum class DescentStop { gradient_tolerance, step_underflow, max_steps };

inline const char* to_string(DescentStop s) {
    switch (s) {
    case DescentStop::gradient_tolerance: return "gradient_tolerance";
    case DescentStop::step_underflow: return "step_underflow";
    case DescentStop::max_steps: return "max_steps";
    }
    return "unknown";
}

struct DescentTrace {
    std::vector<DescentIterate> iterates;
    RadialProfile final_profile;
    std::vector<std::size_t> checkpoint_steps;
    std::vector<AnnulusHistogram> annulus_history;
    DescentStop stop = DescentStop::max_steps;
};

/// Backtracking gradient descent on J that never leaves Omega. A trial step
/// is halved when it exits Omega (counted as a boundary backtrack) or raises
/// J; accepted steps grow the step by 1.5. The outer node is held at its
/// initial value (a Dirichlet end), so the truncated domain cannot lower
/// the spectrum below that of -Delta on the ball.
inline DescentTrace descent_run(const RadialProfile& u0, const GroundStateConstants& k,
                                const DescentOptions& opt = {}) {
    FunctionalReport rep = omega_status(u0, k);
    if (!rep.in_omega) throw Error(ErrorKind::invalid_start, "descent must start inside Omega");

    DescentTrace trace{{}, u0, {}, {}, DescentStop::max_steps};
    RadialProfile u = u0;
    double j = *rep.j_value;
    double tau = opt.step0;
    trace.iterates.push_back({0, j, rep.norms.l2_sq, rep.norms.grad_sq, true, 0});
    trace.checkpoint_steps.push_back(0);
    trace.annulus_history.push_back(annulus_histogram(u));

    std::size_t step = 0;
    while (step < opt.max_steps) {
        const RadialProfile g = j_gradient(u);
        std::vector<double> dir(g.values().begin(), g.values().end());
        dir.back() = 0.0;
        const RadialProfile d(u.grid_ptr(), std::move(dir));
        const double m = rep.norms.l2_sq;
        if (std::sqrt(l2_inner(d, d) * m) < opt.tol) {
            trace.stop = DescentStop::gradient_tolerance;
            break;
        }
        std::size_t backtracks = 0;
        bool accepted = false;
        while (tau >= opt.min_step) {
            const RadialProfile trial = u.axpy(-tau * m, d);
            const FunctionalReport trial_rep = omega_status(trial, k);
            if (!trial_rep.in_omega) {
                ++backtracks;
                tau *= 0.5;
                continue;
            }
            if (*trial_rep.j_value > j) {
                tau *= 0.5;
                continue;
            }
            u = trial;
            rep = trial_rep;
            j = *trial_rep.j_value;
            accepted = true;
            break;
        }
        if (!accepted) {
            trace.stop = DescentStop::step_underflow;
            break;
        }
        ++step;
        tau *= 1.5;
        trace.iterates.push_back({step, j, rep.norms.l2_sq, rep.norms.grad_sq, true, backtracks});
        if (opt.checkpoint_every > 0 && step % opt.checkpoint_every == 0) {
            trace.checkpoint_steps.push_back(step);
            trace.annulus_history.push_back(annulus_histogram(u));
        }
    }
    if (trace.checkpoint_steps.back() != step) {
        trace.checkpoint_steps.push_back(step);
        trace.annulus_history.push_back(annulus_histogram(u));
    }
    trace.final_profile = u;
    return trace;
}

// ---------------------------------------------------------------------------
// Pigeonhole decomposition

struct SplitResult {
    RadialProfile f1;
    RadialProfile f2;
    RadialProfile remainder;
    double cut_exponent = 0.0; // l: outer split cuts at 2^l, inner split at 2^{-l}
    double annulus_h1 = 0.0;   // H^1 norm of u on the selected annulus
    double remainder_h1 = 0.0;
};

/// Raised-cosine ramp: 0 for t <= 0, 1 for t >= 1, C^1 in between.
inline double cosine_ramp(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return 0.5 - 0.5 * std::cos(std::numbers::pi * t);
}

/// ||u||_{H^1} restricted to radii in [lo, hi): nodes for the mass, cell
/// midpoints for the Dirichlet part.
inline double local_h1(const RadialProfile& u, double lo, double hi) {
    const RadialGrid& g = u.grid();
    const auto r = g.nodes();
    const auto w = g.weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (r[i] >= lo && r[i] < hi) acc += w[i] * u[i] * u[i];
    const auto du = g.cell_derivative(u.values());
    const auto rc = g.cell_radii();
    const auto a = g.cell_coefficients();
    for (std::size_t c = 0; c < du.size(); ++c)
        if (rc[c] >= lo && rc[c] < hi) acc += a[c] * du[c] * du[c];
    return std::sqrt(acc);
}

inline constexpr double pigeonhole_fraction = 1e-3;

namespace detail {

// Splits u_i into the piece kept (weight chi) and the piece cut away so
// that kept + cut == u_i exactly: the larger piece is a rounded product and
// the smaller an exact (Sterbenz) difference.
inline std::pair<double, double> exact_split(double u, double chi) {
    if (chi >= 0.5) {
        const double kept = u * chi;
        return {kept, u - kept};
    }
    const double cut = u * (1.0 - chi);
    return {u - cut, cut};
}

// chi1 is 1 on the f1 side of the annulus, chi2 on the f2 side; at most one
// is nonzero at any node.
template <class Chi1, class Chi2>
SplitResult assemble_split(const RadialProfile& u, Chi1 chi1, Chi2 chi2, double exponent,
                           double annulus_h1) {
    const auto r = u.grid().nodes();
    std::vector<double> f1(u.size(), 0.0), f2(u.size(), 0.0), rem(u.size(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double c1 = chi1(r[i]);
        const double c2 = chi2(r[i]);
        if (c1 > 0.0) {
            std::tie(f1[i], rem[i]) = exact_split(u[i], c1);
        } else if (c2 > 0.0) {
            std::tie(f2[i], rem[i]) = exact_split(u[i], c2);
        } else {
            rem[i] = u[i];
        }
    }
    RadialProfile remainder(u.grid_ptr(), std::move(rem));
    const double rem_h1 = std::sqrt(norm_report(remainder).h1_sq);
    return {RadialProfile(u.grid_ptr(), std::move(f1)), RadialProfile(u.grid_ptr(), std::move(f2)),
            std::move(remainder), exponent, annulus_h1, rem_h1};
}

inline void check_split_args(double big_r, double big_rk, double eps) {
    if (!(big_r > 0.0) || !(big_rk > 0.0))
        throw Error(ErrorKind::invalid_parameter, "split radii must be positive");
    if (!(big_rk >= 256.0 * big_r))
        throw Error(ErrorKind::invalid_parameter,
                    "split needs at least 8 dyadic levels between R and R_k");
    if (!(eps >= 0.0)) throw Error(ErrorKind::invalid_parameter, "split tolerance must be >= 0");
}

[[noreturn]] inline void pigeonhole_failure(double min_mass, double threshold) {
    throw Error(ErrorKind::pigeonhole_failure,
                "no dyadic annulus with H^1 mass <= " + std::to_string(threshold)
                    + " (smallest found " + std::to_string(min_mass) + ")");
}

} // namespace detail

/// Outer split through the first dyadic annulus [2^l, 2^{l+1}), 2^l >= 2R,
/// 2^{l+1} <= R_k / 2, whose H^1 mass is at most eps/1000. Candidates are
/// limited to annuli whose midpoint 2^{l+1/2} lies inside the grid.
/// f1 = u on r <= 2^l, f2 = u on r >= 2^{l+1}, supports split at 2^{l+1/2}.
inline SplitResult split_outer(const RadialProfile& u, double big_r, double big_rk, double eps) {
    detail::check_split_args(big_r, big_rk, eps);
    const RadialGrid& g = u.grid();
    const double threshold = eps * pigeonhole_fraction;
    const int l_first = static_cast<int>(std::ceil(std::log2(2.0 * big_r)));
    const int l_last = static_cast<int>(std::floor(std::log2(big_rk / 2.0))) - 1;
    double min_mass = std::numeric_limits<double>::infinity();
    for (int l = l_first; l <= l_last; ++l) {
        const double lo = std::ldexp(1.0, l);
        const double mid = lo * std::numbers::sqrt2;
        const double hi = 2.0 * lo;
        if (!(mid < g.r_max())) break;
        const double mass = local_h1(u, lo, hi);
        min_mass = std::min(min_mass, mass);
        if (mass <= threshold && eps > 0.0) {
            auto chi1 = [=](double r) { return 1.0 - cosine_ramp((r - lo) / (mid - lo)); };
            auto chi2 = [=](double r) { return r > mid ? cosine_ramp((r - mid) / (hi - mid)) : 0.0; };
            auto chi1_strict = [=](double r) { return r < mid ? chi1(r) : 0.0; };
            return detail::assemble_split(u, chi1_strict, chi2, l, mass);
        }
    }
    detail::pigeonhole_failure(min_mass, threshold);
}

/// Inner split through the first annulus [2^{-l-1}, 2^{-l}), 2^{-l} <= 1/(2R),
/// 2^{-l-1} >= 2/R_k, with H^1 mass at most eps/1000 and midpoint above the
/// first node. f1 = u on r >= 2^{-l}, f2 = u on r <= 2^{-l-1}.
inline SplitResult split_inner(const RadialProfile& u, double big_r, double big_rk, double eps) {
    detail::check_split_args(big_r, big_rk, eps);
    const RadialGrid& g = u.grid();
    const double threshold = eps * pigeonhole_fraction;
    const int l_first = static_cast<int>(std::ceil(std::log2(2.0 * big_r)));
    const int l_last = static_cast<int>(std::floor(std::log2(big_rk / 2.0))) - 1;
    double min_mass = std::numeric_limits<double>::infinity();
    for (int l = l_first; l <= l_last; ++l) {
        const double hi = std::ldexp(1.0, -l);
        const double lo = hi / 2.0;
        const double mid = lo * std::numbers::sqrt2;
        if (!(mid > g.nodes().front())) break;
        const double mass = local_h1(u, lo, hi);
        min_mass = std::min(min_mass, mass);
        if (mass <= threshold && eps > 0.0) {
            auto chi1 = [=](double r) { return r > mid ? cosine_ramp((r - mid) / (hi - mid)) : 0.0; };
            auto chi2 = [=](double r) {
                return r < mid ? 1.0 - cosine_ramp((r - lo) / (mid - lo)) : 0.0;
            };
            return detail::assemble_split(u, chi1, chi2, l, mass);
        }
    }
    detail::pigeonhole_failure(min_mass, threshold);
}

// Reference profile for the decoupling experiments: 3.4 r^3.1 e^{-r} (1 + 2r)^{-7.6}.
// Its H^1 mass per dyadic annulus falls roughly tenfold per level both
// outward (r^{-4.5} e^{-r}) and inward (r^{3.1}), so the pigeonhole picks a
// different annulus for each decade of eps, with R = 1 and R_k = 1024.
inline constexpr double split_reference_r_max = 30.0;
inline constexpr std::size_t split_reference_n = 60000;
inline constexpr double split_reference_big_r = 1.0;
inline constexpr double split_reference_big_rk = 1024.0;

inline GridPtr split_reference_grid() {
    return RadialGrid::hyperbolic(split_reference_r_max, split_reference_n);
}

inline RadialProfile split_reference_profile(const GridPtr& grid) {
    return sample(grid, [](double r) {
        return 3.4 * std::pow(r, 3.1) * std::exp(-r) * std::pow(1.0 + 2.0 * r, -7.6);
    });
}

struct DecouplingResiduals {
    double energy_resid = 0.0;  // |E(u) - E(f1) - E(f2)|
    double kinetic_resid = 0.0; // | ||grad u||^2 - ||grad f1||^2 - ||grad f2||^2 |
};

inline DecouplingResiduals decoupling_residuals(const RadialProfile& u, const SplitResult& s) {
    if (!u.same_grid(s.f1) || !u.same_grid(s.f2) || !u.same_grid(s.remainder))
        throw Error(ErrorKind::invalid_pair, "split pieces do not share the profile's grid");
    const NormReport nu = norm_report(u);
    const NormReport n1 = norm_report(s.f1);
    const NormReport n2 = norm_report(s.f2);
    return {std::abs(energy(nu) - energy(n1) - energy(n2)),
            std::abs(nu.grad_sq - n1.grad_sq - n2.grad_sq)};
}

} // namespace hypvar
