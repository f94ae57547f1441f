#pragma once

// Subcommands of the `hypvar` tool. Each one runs an experiment and fills a
// report document whose properties carry explicit tolerances; the exit code
// is 0 when all pass, 1 when one fails and 2 on usage or config errors.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hypvar/elliptic_shooting.hpp"
#include "hypvar/error.hpp"
#include "hypvar/functionals.hpp"
#include "hypvar/ground_state.hpp"
#include "hypvar/hyperbolic_radial.hpp"
#include "hypvar/minimizer_search.hpp"
#include "hypvar/profile_suite.hpp"
#include "hypvar/report.hpp"

namespace hypvar::cli {

struct RunConfig {
    double r_max = RadialGrid::default_hyperbolic_r_max;
    std::size_t n = RadialGrid::default_hyperbolic_n;
    std::uint64_t seed = 42;
    std::string out;
    std::string format = "json";
    std::size_t count = 0; // random suite size; 0 picks the command default
    unsigned threads = 0;

    int k_max = 10;
    double eps0 = 0.5;

    std::size_t runs = 50;
    std::size_t max_steps = 2000;
    double start_level = 1.0; // starts have E < start_level E(Q)
    std::size_t gradient_pairs = 20;

    double delta0 = 0.1;
    double hardy_cap = 10.0;

    double lambda_lo = -5.0, lambda_hi = 5.0;
    std::size_t lambda_count = 21;
    double a_lo = 0.0, a_hi = 3.0;
    std::size_t a_count = 20;
    double shoot_r_max = 30.0;
    double blow_up = 1e6;
    double tail = 1e-8;
};

inline report::Json echo(const RunConfig& c) {
    return {{"r_max", c.r_max},         {"n", c.n},
            {"seed", c.seed},           {"out", c.out},
            {"format", c.format},       {"count", c.count},
            {"k_max", c.k_max},         {"eps0", c.eps0},
            {"runs", c.runs},           {"max_steps", c.max_steps},
            {"start_level", c.start_level}, {"gradient_pairs", c.gradient_pairs},
            {"delta0", c.delta0},       {"hardy_cap", c.hardy_cap},
            {"lambda_lo", c.lambda_lo}, {"lambda_hi", c.lambda_hi},
            {"lambda_count", c.lambda_count}, {"a_lo", c.a_lo},
            {"a_hi", c.a_hi},           {"a_count", c.a_count},
            {"shoot_r_max", c.shoot_r_max}, {"blow_up", c.blow_up},
            {"tail", c.tail}};
}

namespace detail {

using report::Cell;
using report::Document;
using report::Table;

inline Cell num(double x) { return x; }
inline Cell num(std::size_t x) { return static_cast<std::int64_t>(x); }
inline Cell num(int x) { return static_cast<std::int64_t>(x); }

inline std::size_t count_or(const RunConfig& c, std::size_t fallback) {
    return c.count ? c.count : fallback;
}

inline GridPtr grid(const RunConfig& c) { return RadialGrid::hyperbolic(c.r_max, c.n); }

// Runs f(i) for i < total on a small thread pool; results land by index.
template <class F>
void parallel_for(std::size_t total, unsigned threads, F&& f) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = cursor++; i < total; i = cursor++) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
        work();
    }
    if (failure) std::rethrow_exception(failure);
}

inline void histogram_table(Document& doc, std::string name, const AnnulusHistogram& h) {
    Table t{std::move(name), {"bin_lo", "bin_hi", "l2_share", "grad_share", "l6_share"}, {}};
    for (std::size_t b = 0; b < h.size(); ++b)
        t.rows.push_back({h.bin_lo[b], h.bin_hi[b], h.l2_share[b], h.grad_share[b], h.l6_share[b]});
    doc.tables.push_back(std::move(t));
}

} // namespace detail

inline report::Document run_constants(const RunConfig&) {
    report::Document doc;
    const GroundStateConstants k = ground_state::compute_constants(*RadialGrid::euclidean());
    const double closed = ground_state::grad_q_sq_closed_form();
    std::vector<double> radii;
    for (double r = 1e-3; r < 1e3; r *= 1.1) radii.push_back(r);
    const double residual = ground_state::verify_q_residual(radii);
    doc.scalar("grad_q_sq", k.grad_q_sq);
    doc.scalar("grad_q_sq_closed_form", closed);
    doc.scalar("c3", k.c3);
    doc.scalar("energy_q", k.energy_q);
    doc.scalar("q_l6_6", k.q_l6_6);
    doc.scalar("q_equation_residual", residual);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    doc.check("grad_q_sq_matches_closed_form", rel(k.grad_q_sq, closed), 1e-4);
    doc.check("grad_q_sq_times_c3_cubed_is_one", rel(k.grad_q_sq * std::pow(k.c3, 3), 1.0), 1e-4);
    doc.check("energy_q_is_grad_q_sq_over_3", rel(k.energy_q, k.grad_q_sq / 3.0), 1e-4);
    doc.check("q_l6_6_equals_grad_q_sq", rel(k.q_l6_6, k.grad_q_sq), 1e-4);
    doc.check("q_solves_its_equation", residual, 1e-12);
    return doc;
}

inline report::Document run_spectrum(const RunConfig& c) {
    report::Document doc;
    const GridPtr g = detail::grid(c);
    report::Table t{"exponentials", {"alpha", "quotient", "alpha_squared"}, {}};
    double worst_exp = 0.0;
    for (double alpha : {1.25, 1.5, 2.0}) {
        const double q = rayleigh_quotient(sample_exponential(g, alpha, 1.0));
        worst_exp = std::max(worst_exp, std::abs(q - alpha * alpha));
        t.rows.push_back({alpha, q, alpha * alpha});
    }
    doc.tables.push_back(std::move(t));
    suite::Rng rng(c.seed);
    const std::size_t count = detail::count_or(c, 200);
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i)
        lowest = std::min(lowest, rayleigh_quotient(suite::smooth_profile(g, rng)));
    doc.scalar("random_profiles", detail::num(count));
    doc.scalar("lowest_random_quotient", lowest);
    doc.check("exponential_quotient_error", worst_exp, 1e-4);
    doc.check("random_quotient_at_least", lowest, 1.0 - 1e-3, true);
    return doc;
}

inline report::Document run_infimum(const RunConfig& c) {
    report::Document doc;
    const auto k = ground_state::default_constants();
    const auto seq = minimizing_sequence(detail::grid(c), c.k_max, c.eps0, k);
    report::Table t{"sequence",
                    {"k", "alpha", "amplitude", "j", "alpha_sq_over_2", "grad_sq", "energy", "in_omega"},
                    {}};
    bool decreasing = true, all_in = true;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const auto& e = seq[i];
        const double j = *e.report.j_value;
        if (i > 0 && !(j < *seq[i - 1].report.j_value)) decreasing = false;
        all_in = all_in && e.report.in_omega;
        t.rows.push_back({detail::num(e.k), e.alpha, e.amplitude, j, e.alpha * e.alpha / 2,
                          e.report.norms.grad_sq, e.report.energy,
                          std::string(e.report.in_omega ? "true" : "false")});
    }
    doc.tables.push_back(std::move(t));
    const double last = seq.empty() ? std::numeric_limits<double>::infinity()
                                    : *seq.back().report.j_value;
    doc.scalar("final_j", last);
    doc.check("final_j", last, 0.501);
    doc.check("j_strictly_decreasing", decreasing ? 1.0 : 0.0, 1.0, true);
    doc.check("all_in_omega", all_in ? 1.0 : 0.0, 1.0, true);
    return doc;
}

/// Largest mismatch between <j_gradient(u), v> and a central difference
/// with step 1e-5, over `pairs` random pairs of unit H^1 norm, relative to
/// ||j_gradient(u)|| ||v||. Random pairs are often nearly orthogonal, and a
/// directional derivative near 1e-10 is below the rounding floor of the
/// difference quotient.
inline double gradient_fd_error(const GridPtr& g, std::size_t pairs, std::uint64_t seed) {
    suite::Rng rng(seed);
    auto unit = [](const RadialProfile& f) { return f.scaled(1.0 / std::sqrt(norm_report(f).h1_sq)); };
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
        const auto u = unit(suite::smooth_profile(g, rng));
        const auto v = unit(suite::smooth_profile(g, rng));
        const double t = 1e-5;
        const double fd = (j_value(u.axpy(t, v)) - j_value(u.axpy(-t, v))) / (2 * t);
        const RadialProfile grad = j_gradient(u);
        const double an = l2_inner(grad, v);
        worst = std::max(worst, std::abs(fd - an) / std::sqrt(l2_sq(grad) * l2_sq(v)));
    }
    return worst;
}

inline report::Document run_descent(const RunConfig& c) {
    report::Document doc;
    const auto k = ground_state::default_constants();
    const GridPtr g = detail::grid(c);
    suite::Rng rng(c.seed);
    std::vector<RadialProfile> starts;
    for (std::size_t i = 0; i < c.runs; ++i)
        starts.push_back(suite::scale_into_region(suite::smooth_profile(g, rng), c.start_level, k, rng));
    DescentOptions opt;
    opt.max_steps = c.max_steps;
    std::vector<std::optional<DescentTrace>> runs(c.runs);
    detail::parallel_for(c.runs, c.threads,
                         [&](std::size_t i) { runs[i] = descent_run(starts[i], k, opt); });
    std::vector<DescentTrace> traces;
    for (auto& r : runs) traces.push_back(std::move(*r));

    report::Table t{"runs",
                    {"run", "start_j", "final_j", "lowest_in_omega_j", "steps", "stop",
                     "start_mean_level", "final_mean_level"},
                    {}};
    double lowest = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& it = traces[i].iterates;
        double run_low = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < it.size(); ++s) {
            if (it[s].in_omega) run_low = std::min(run_low, it[s].j_value);
            if (s > 0 && it[s].j_value > it[s - 1].j_value) monotone = false;
        }
        lowest = std::min(lowest, run_low);
        const auto& hist = traces[i].annulus_history;
        t.rows.push_back({detail::num(i), it.front().j_value, it.back().j_value, run_low,
                          detail::num(it.back().step), std::string(to_string(traces[i].stop)),
                          hist.front().mean_level(), hist.back().mean_level()});
    }
    doc.tables.push_back(std::move(t));
    if (!traces.empty()) detail::histogram_table(doc, "final_histogram_run0", traces[0].annulus_history.back());

    const double grad_err = gradient_fd_error(g, c.gradient_pairs, c.seed + 1);
    doc.scalar("lowest_in_omega_j", lowest);
    doc.scalar("gradient_fd_relative_error", grad_err);
    doc.check("lowest_in_omega_j", lowest, 0.5 - 5e-3, true);
    doc.check("j_non_increasing", monotone ? 1.0 : 0.0, 1.0, true);
    doc.check("gradient_matches_central_differences", grad_err, 1e-5);
    return doc;
}

inline report::Document run_trapping(const RunConfig& c) {
    report::Document doc;
    const auto k = ground_state::default_constants();
    const GridPtr g = detail::grid(c);
    suite::Rng rng(c.seed);
    const std::size_t count = detail::count_or(c, 100);
    double rg = std::numeric_limits<double>::infinity(), rc = rg, rp = rg;
    double delta_bar = trapping_delta_bar(c.delta0, k);
    for (std::size_t i = 0; i < count; ++i) {
        const auto u = suite::scale_into_region(suite::smooth_profile(g, rng), 1.0 - c.delta0, k, rng);
        const TrappingReport rep = trapping_check(u, c.delta0, k);
        rg = std::min(rg, rep.resid_grad);
        rc = std::min(rc, rep.resid_coercive);
        rp = std::min(rp, rep.resid_positivity);
    }
    doc.scalar("profiles", detail::num(count));
    doc.scalar("delta_bar", delta_bar);
    doc.scalar("coercivity", 1.0 / 3.0 + delta_bar / 6.0);
    doc.check("min_resid_grad", rg, -1e-8, true);
    doc.check("min_resid_coercive", rc, -1e-8, true);
    doc.check("min_resid_positivity", rp, -1e-8, true);
    return doc;
}

inline report::Document run_sobolev(const RunConfig& c) {
    report::Document doc;
    const auto k = ground_state::default_constants();
    const GridPtr g = detail::grid(c);
    suite::Rng rng(c.seed);
    const std::size_t count = detail::count_or(c, 500);
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const NormReport n = norm_report(suite::smooth_profile(g, rng));
        worst = std::max(worst, std::pow(n.l6_6, 1.0 / 6.0) / (k.c3 * std::sqrt(n.grad_sq)));
    }
    doc.scalar("profiles", detail::num(count));
    doc.scalar("c3", k.c3);
    doc.scalar("worst_ratio", worst);
    doc.check("l6_over_c3_grad_at_most", worst, 1.0 + 1e-3);
    return doc;
}

inline report::Document run_hardy(const RunConfig& c) {
    report::Document doc;
    const GridPtr g = detail::grid(c);
    suite::Rng rng(c.seed);
    const std::size_t count = detail::count_or(c, 100);
    double worst = 0.0, worst_r = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const auto u = suite::smooth_profile(g, rng);
        const HardyResult h = hardy_check(u.scaled(1.0 / std::sqrt(norm_report(u).h1_sq)));
        if (!std::isfinite(h.constant) || h.constant > worst) {
            worst = h.constant;
            worst_r = h.worst_r;
        }
    }
    doc.scalar("profiles", detail::num(count));
    doc.scalar("worst_radius", worst_r);
    doc.check("hardy_constant_at_most", worst, c.hardy_cap);
    return doc;
}

inline report::Document run_split(const RunConfig&) {
    report::Document doc;
    const GridPtr g = split_reference_grid();
    const RadialProfile u = split_reference_profile(g);
    const std::vector<double> eps{1e-1, 1e-2, 1e-3};
    report::Table t{"splits",
                    {"side", "eps", "cut_exponent", "annulus_h1", "remainder_h1", "energy_resid",
                     "kinetic_resid"},
                    {}};
    auto slope = [&](const std::vector<double>& res) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            mx += std::log(eps[i]) / eps.size();
            my += std::log(res[i]) / eps.size();
        }
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            sxy += (std::log(eps[i]) - mx) * (std::log(res[i]) - my);
            sxx += (std::log(eps[i]) - mx) * (std::log(eps[i]) - mx);
        }
        return sxy / sxx;
    };
    for (const bool outer : {true, false}) {
        const std::string side = outer ? "outer" : "inner";
        std::vector<double> er, kr;
        double worst_rem = 0, worst_res = 0;
        bool exact = true, disjoint = true;
        for (double e : eps) {
            const SplitResult s = outer ? split_outer(u, split_reference_big_r, split_reference_big_rk, e)
                                        : split_inner(u, split_reference_big_r, split_reference_big_rk, e);
            for (std::size_t i = 0; i < u.size(); ++i) {
                exact = exact && s.f1[i] + s.f2[i] + s.remainder[i] == u[i];
                disjoint = disjoint && (s.f1[i] == 0.0 || s.f2[i] == 0.0);
            }
            const DecouplingResiduals d = decoupling_residuals(u, s);
            er.push_back(d.energy_resid);
            kr.push_back(d.kinetic_resid);
            worst_rem = std::max(worst_rem, s.remainder_h1 / e);
            worst_res = std::max({worst_res, d.energy_resid / (e * e), d.kinetic_resid / (e * e)});
            t.rows.push_back({side, e, s.cut_exponent, s.annulus_h1, s.remainder_h1, d.energy_resid,
                              d.kinetic_resid});
        }
        doc.check(side + "_exact_reassembly", exact ? 1.0 : 0.0, 1.0, true);
        doc.check(side + "_disjoint_supports", disjoint ? 1.0 : 0.0, 1.0, true);
        doc.check(side + "_remainder_over_eps", worst_rem, 1.0);
        doc.check(side + "_residual_over_eps_sq", worst_res, 10.0);
        doc.check(side + "_energy_slope", slope(er), 1.8, true);
        doc.check(side + "_kinetic_slope", slope(kr), 1.8, true);
    }
    doc.tables.push_back(std::move(t));
    return doc;
}

inline report::Document run_shoot_sweep(const RunConfig& c) {
    report::Document doc;
    const SweepRange lambdas{c.lambda_lo, c.lambda_hi, c.lambda_count};
    const SweepRange heights{c.a_lo, c.a_hi, c.a_count};
    ShootingOptions opt;
    opt.blow_up_threshold = c.blow_up;
    opt.tail_threshold = c.tail;
    const auto table = sweep(lambdas, heights, c.shoot_r_max, opt, c.threads);
    ShootingOptions perturbed_opt = opt;
    perturbed_opt.blow_up_threshold = c.blow_up / 10;
    perturbed_opt.tail_threshold = c.tail * 10;
    const auto perturbed = sweep(lambdas, heights, c.shoot_r_max, perturbed_opt, c.threads);

    report::Table t{"sweep", {"lambda", "a", "classification", "first_zero_r", "tail_h1"}, {}};
    std::size_t changed = 0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& r = table[i];
        const double zero = r.classification == Classification::sign_change
                                ? r.event_r
                                : std::numeric_limits<double>::quiet_NaN();
        t.rows.push_back({r.lambda, r.a, std::string(to_string(r.classification)), zero, r.tail_h1});
        changed += r.classification != perturbed[i].classification;
    }
    doc.tables.push_back(std::move(t));
    const SweepSummary s = summarize(table), p = summarize(perturbed);
    doc.scalar("results", detail::num(table.size()));
    doc.scalar("sign_change", detail::num(s.sign_change));
    doc.scalar("blow_up", detail::num(s.blow_up));
    doc.scalar("decay_candidate", detail::num(s.decay_candidate));
    doc.scalar("positive_nondecaying", detail::num(s.positive_nondecaying));
    doc.scalar("perturbed_decay_candidate", detail::num(p.decay_candidate));
    doc.check("decay_candidates", static_cast<double>(s.decay_candidate), 0.0);
    doc.check("decay_candidates_under_perturbation", static_cast<double>(p.decay_candidate), 0.0);
    doc.check("classifications_changed_by_perturbation", static_cast<double>(changed), 0.0);
    return doc;
}

using Command = std::function<report::Document(const RunConfig&)>;

inline const std::map<std::string, Command>& commands() {
    static const std::map<std::string, Command> table{
        {"constants", run_constants}, {"infimum", run_infimum},   {"descent", run_descent},
        {"trapping", run_trapping},   {"sobolev", run_sobolev},   {"hardy", run_hardy},
        {"split", run_split},         {"shoot-sweep", run_shoot_sweep}, {"spectrum", run_spectrum},
    };
    return table;
}

inline void build_app(CLI::App& app, RunConfig& c) {
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file; keys are the long flag names, flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.add_option("--r-max", c.r_max, "hyperbolic grid radius")->capture_default_str();
    app.add_option("--n", c.n, "hyperbolic grid nodes")->capture_default_str();
    app.add_option("--seed", c.seed, "random seed")->capture_default_str();
    app.add_option("--out", c.out, "report path (default <command>.<format>)");
    app.add_option("--format", c.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    app.add_option("--count", c.count, "random suite size (0: command default)");
    app.add_option("--threads", c.threads, "worker threads (0: hardware)");
    app.add_option("--k-max", c.k_max, "infimum: sequence length")->capture_default_str();
    app.add_option("--eps0", c.eps0, "infimum: base amplitude")->capture_default_str();
    app.add_option("--runs", c.runs, "descent: number of runs")->capture_default_str();
    app.add_option("--max-steps", c.max_steps, "descent: steps per run")->capture_default_str();
    app.add_option("--start-level", c.start_level, "descent: starts have E below this times E(Q)")
        ->capture_default_str();
    app.add_option("--gradient-pairs", c.gradient_pairs, "descent: finite-difference pairs")
        ->capture_default_str();
    app.add_option("--delta0", c.delta0, "trapping: energy margin")->capture_default_str();
    app.add_option("--hardy-cap", c.hardy_cap, "hardy: bound on the constant")->capture_default_str();
    app.add_option("--lambda-lo", c.lambda_lo)->capture_default_str();
    app.add_option("--lambda-hi", c.lambda_hi)->capture_default_str();
    app.add_option("--lambda-count", c.lambda_count)->capture_default_str();
    app.add_option("--a-lo", c.a_lo)->capture_default_str();
    app.add_option("--a-hi", c.a_hi)->capture_default_str();
    app.add_option("--a-count", c.a_count)->capture_default_str();
    app.add_option("--shoot-r-max", c.shoot_r_max)->capture_default_str();
    app.add_option("--blow-up", c.blow_up, "shoot-sweep: blow-up threshold")->capture_default_str();
    app.add_option("--tail", c.tail, "shoot-sweep: tail H^1 threshold")->capture_default_str();
    for (const auto& [name, cmd] : commands()) app.add_subcommand(name)->fallthrough();
}

/// Parses, runs and reports. Diagnostics go to `err`, the one-line summary to `out`.
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Variational experiments for the energy-critical problem on H^3", "hypvar"};
    RunConfig cfg;
    build_app(app, cfg);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "hypvar: " << e.what() << '\n';
        return 2;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    if (cfg.out.empty()) cfg.out = name + "." + cfg.format;

    std::ofstream file(cfg.out, std::ios::binary);
    if (!file) {
        err << "hypvar: cannot write " << cfg.out << '\n';
        return 2;
    }
    report::Document doc;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        doc = commands().at(name)(cfg);
    } catch (const Error& e) {
        err << "hypvar " << name << ": " << e.what() << '\n';
        return 2;
    }
    doc.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    doc.command = name;
    doc.config = echo(cfg);
    if (cfg.format == "csv") report::write_csv(file, doc);
    else report::write_json(file, doc);
    file.close();
    if (!file) {
        err << "hypvar: failed writing " << cfg.out << '\n';
        return 2;
    }
    for (const auto& p : doc.properties)
        if (!p.passed)
            err << "hypvar " << name << ": property " << p.name << " failed (value "
                << report::format_number(p.value) << ", tolerance "
                << report::format_number(p.tolerance) << ")\n";
    out << name << ": " << doc.passed_count() << "/" << doc.properties.size()
        << " properties passed, report " << cfg.out << '\n';
    return doc.all_passed() ? 0 : 1;
}

} // namespace hypvar::cli
