#pragma once

// Shooting probe for positive H^1 solutions of the radial equation
//
//     u'' + 2 coth(r) u' = -u^5 + lambda u,   u(0) = a > 0, u'(0) = 0.
//
// Each trajectory is classified as crossing zero, blowing up, or staying
// positive; a positive trajectory is a decay candidate only if its H^1(H^3)
// mass on [r_max/2, r_max] is negligible.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <thread>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "hypvar/error.hpp"
#include "hypvar/hyperbolic_radial.hpp"

namespace hypvar {

enum class Classification { sign_change, blow_up, decay_candidate, positive_nondecaying };

inline const char* to_string(Classification c) {
    switch (c) {
    case Classification::sign_change: return "sign_change";
    case Classification::blow_up: return "blow_up";
    case Classification::decay_candidate: return "decay_candidate";
    case Classification::positive_nondecaying: return "positive_nondecaying";
    }
    return "unknown";
}

struct Trajectory {
    std::vector<double> r;
    std::vector<double> u;
    std::vector<double> du;

    std::size_t size() const noexcept { return r.size(); }
    void push(double rr, double uu, double dd) {
        r.push_back(rr);
        u.push_back(uu);
        du.push_back(dd);
    }
};

struct ShootingOptions {
    double r0 = 1e-3;               // end of the Taylor start
    double abs_tol = 1e-12;
    double rel_tol = 1e-11;
    double sample_step = 1e-2;
    double blow_up_threshold = 1e6;
    double tail_threshold = 1e-8;
    bool keep_trajectory = true;
};

struct ClassifyResult {
    Classification classification = Classification::positive_nondecaying;
    double event_r = std::numeric_limits<double>::quiet_NaN(); // first zero or blow-up radius
};

struct ShootingResult {
    double lambda = 0.0;
    double a = 0.0;
    Classification classification = Classification::positive_nondecaying;
    double event_r = std::numeric_limits<double>::quiet_NaN();
    double tail_h1 = 0.0;
    Trajectory trajectory;
};

/// int_{r_end/2}^{r_end} (u'^2 + u^2) 4 pi sinh^2 r dr by the trapezoid rule on the samples.
inline double tail_h1(const Trajectory& t) {
    if (t.size() < 2) return 0.0;
    const double start = t.r.back() / 2.0;
    auto f = [&](std::size_t i) {
        const double s = std::sinh(t.r[i]);
        return (t.du[i] * t.du[i] + t.u[i] * t.u[i]) * 4.0 * std::numbers::pi * s * s;
    };
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t.r[i] <= start) continue;
        const double left = std::max(t.r[i - 1], start);
        acc += 0.5 * (f(i - 1) + f(i)) * (t.r[i] - left);
    }
    return acc;
}

namespace detail {

// Cubic Hermite interpolant of u on [r0, r1] from values and slopes.
inline double hermite(double r0, double r1, double u0, double u1, double d0, double d1, double r) {
    const double h = r1 - r0;
    const double s = (r - r0) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * u0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * u1
           + (s3 - s2) * h * d1;
}

} // namespace detail

/// Scans the samples in order; the first zero crossing (bisected on the
/// Hermite interpolant) or the first |u| above the blow-up threshold decides.
inline ClassifyResult classify(const Trajectory& t, double tail, double blow_up_threshold = 1e6,
                               double tail_threshold = 1e-8) {
    ClassifyResult res;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::abs(t.u[i]) > blow_up_threshold) {
            res.classification = Classification::blow_up;
            res.event_r = t.r[i];
            return res;
        }
        if (t.u[i] == 0.0) {
            res.classification = Classification::sign_change;
            res.event_r = t.r[i];
            return res;
        }
        if (i > 0 && (t.u[i - 1] > 0.0) != (t.u[i] > 0.0)) {
            double lo = t.r[i - 1], hi = t.r[i];
            const bool lo_positive = t.u[i - 1] > 0.0;
            for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double v = detail::hermite(t.r[i - 1], t.r[i], t.u[i - 1], t.u[i],
                                                 t.du[i - 1], t.du[i], mid);
                ((v > 0.0) == lo_positive ? lo : hi) = mid;
            }
            res.classification = Classification::sign_change;
            res.event_r = 0.5 * (lo + hi);
            return res;
        }
    }
    const bool positive = !t.u.empty() && t.u.front() > 0.0;
    res.classification = positive && tail < tail_threshold ? Classification::decay_candidate
                                                           : Classification::positive_nondecaying;
    return res;
}

inline ShootingResult shoot(double lambda, double a, double r_max,
                            const ShootingOptions& opt = {}) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 2>;
    if (!(a > 0.0)) throw Error(ErrorKind::invalid_parameter, "shooting height a must be positive");
    if (!(r_max >= 20.0)) throw Error(ErrorKind::invalid_parameter, "shooting needs r_max >= 20");

    // Near r = 0 the equation reads u'' + (2/r) u' = u''(0) * 3, so
    // u = a + (lambda a - a^5) r^2 / 6.
    const double curv = (lambda * a - std::pow(a, 5)) / 3.0;
    Trajectory traj;
    traj.push(0.0, a, 0.0);
    State x{a + curv * opt.r0 * opt.r0 / 2.0, curv * opt.r0};
    traj.push(opt.r0, x[0], x[1]);

    auto rhs = [lambda](const State& s, State& ds, double r) {
        const double u = s[0], u2 = u * u;
        ds[0] = s[1];
        ds[1] = -2.0 * stable_coth(r) * s[1] - u2 * u2 * u + lambda * u;
    };
    auto stepper = odeint::make_dense_output(opt.abs_tol, opt.rel_tol,
                                             odeint::runge_kutta_dopri5<State>());
    stepper.initialize(x, opt.r0, opt.r0);

    std::size_t next = static_cast<std::size_t>(std::floor(opt.r0 / opt.sample_step)) + 1;
    auto sample_at = [&](std::size_t j) { return std::min(r_max, j * opt.sample_step); };
    bool blew_up = false;
    while (!blew_up && traj.r.back() < r_max) {
        stepper.do_step(rhs);
        while (!blew_up && sample_at(next) <= stepper.current_time() && traj.r.back() < r_max) {
            const double rs = sample_at(next++);
            State y;
            stepper.calc_state(rs, y);
            traj.push(rs, y[0], y[1]);
            blew_up = !std::isfinite(y[0]) || std::abs(y[0]) > opt.blow_up_threshold;
        }
        if (!std::isfinite(stepper.current_state()[0])) blew_up = true;
    }

    ShootingResult res;
    res.lambda = lambda;
    res.a = a;
    res.tail_h1 = blew_up ? std::numeric_limits<double>::infinity() : tail_h1(traj);
    const ClassifyResult c = classify(traj, res.tail_h1, opt.blow_up_threshold, opt.tail_threshold);
    res.classification = c.classification;
    res.event_r = c.event_r;
    if (opt.keep_trajectory) res.trajectory = std::move(traj);
    return res;
}

struct SweepRange {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

struct SweepSummary {
    std::size_t sign_change = 0;
    std::size_t blow_up = 0;
    std::size_t decay_candidate = 0;
    std::size_t positive_nondecaying = 0;
};

/// lambda_i = lo + (hi - lo) i / (count - 1) (closed range);
/// a_j = lo + (hi - lo) (j + 1) / count (half-open (lo, hi]).
/// Results are ordered lambda-major regardless of the thread count.
inline std::vector<ShootingResult> sweep(const SweepRange& lambdas, const SweepRange& heights,
                                         double r_max, ShootingOptions opt = {},
                                         unsigned threads = 0) {
    opt.keep_trajectory = false;
    if (!(r_max >= 20.0)) throw Error(ErrorKind::invalid_parameter, "shooting needs r_max >= 20");
    if (heights.count > 0 && !(heights.lo >= 0.0 && heights.hi > heights.lo))
        throw Error(ErrorKind::invalid_parameter, "heights must form a range (lo, hi] with lo >= 0");
    const std::size_t total = lambdas.count * heights.count;
    std::vector<ShootingResult> out(total);
    if (total == 0) return out;
    auto lambda_at = [&](std::size_t i) {
        return lambdas.count == 1 ? lambdas.lo
                                  : lambdas.lo + (lambdas.hi - lambdas.lo) * static_cast<double>(i)
                                                     / static_cast<double>(lambdas.count - 1);
    };
    auto a_at = [&](std::size_t j) {
        return heights.lo + (heights.hi - heights.lo) * static_cast<double>(j + 1)
                                / static_cast<double>(heights.count);
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    std::atomic<std::size_t> cursor{0};
    auto work = [&] {
        for (std::size_t idx = cursor++; idx < total; idx = cursor++)
            out[idx] = shoot(lambda_at(idx / heights.count), a_at(idx % heights.count), r_max, opt);
    };
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    return out;
}

inline SweepSummary summarize(const std::vector<ShootingResult>& results) {
    SweepSummary s;
    for (const auto& r : results) {
        switch (r.classification) {
        case Classification::sign_change: ++s.sign_change; break;
        case Classification::blow_up: ++s.blow_up; break;
        case Classification::decay_candidate: ++s.decay_candidate; break;
        case Classification::positive_nondecaying: ++s.positive_nondecaying; break;
        }
    }
    return s;
}

} // namespace hypvar
