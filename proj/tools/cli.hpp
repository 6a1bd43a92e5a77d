#pragma once

/**
 * @file cli.hpp
 * @brief Command-line front end.  Exit codes: 0 success, 2 configuration or
 * validation error, 3 not found, 4 numeric failure.
 */

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rauzy/rauzy.hpp"

namespace rauzy::cli {

using json = nlohmann::json;

struct Settings {
    std::string pi;
    std::string q;
    std::size_t steps = 1'000'000;
    std::size_t burn_in = 1000;
    std::size_t n_max = 20;
    std::uint64_t cap = default_cap;
    std::uint64_t seed = 1;
    std::string backend = "float";
    double epsilon = 0.1;
    double alpha = 1.0;
    double floor_mult = 3.0;
    std::string out;
    std::string format = "csv";
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::size_t streams = 8;
    std::string lambda;
    std::size_t max_len = 12;
    std::uint64_t max_count = 3;
    /// 0 selects the subcommand's default.
    std::size_t samples = 0;
    std::string observable = "lambda_1";
    std::string psi;
    std::string table = "returns";
    std::string config;
};

/// Parses `p/q`, an integer, or a plain decimal such as `0.25` exactly.
[[nodiscard]] inline Rational parse_rational(const std::string& text) {
    auto bad = [&] { return ValidationError("bad rational '" + text + "'"); };
    auto digits = [](const std::string& s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (const auto slash = text.find('/'); slash != std::string::npos) {
        const std::string p = text.substr(0, slash), q = text.substr(slash + 1);
        if (!digits(p) || !digits(q) || BigInt(q) == 0) throw bad();
        return Rational(BigInt(p), BigInt(q));
    }
    const auto dot = text.find('.');
    const std::string ip = text.substr(0, dot);
    const std::string fp = dot == std::string::npos ? "" : text.substr(dot + 1);
    if ((!ip.empty() && !digits(ip)) || (!fp.empty() && !digits(fp)) || (ip.empty() && fp.empty())) throw bad();
    BigInt den = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
    return Rational(BigInt(ip.empty() ? "0" : ip) * den + BigInt(fp.empty() ? "0" : fp), den);
}

[[nodiscard]] inline std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        out.push_back(item);
    }
    return out;
}

[[nodiscard]] inline std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_commas(text)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw ValidationError("bad number '" + item + "' in --lambda");
        out.push_back(v);
    }
    return out;
}

namespace detail {

inline void event(std::ostream& err, const std::string& name, std::size_t step, const std::string& extra = "") {
    err << "event=" << name << " step=" << step;
    if (!extra.empty()) err << ' ' << extra;
    err << '\n';
}

inline std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) out += (c == '"' ? '\'' : c);
    return out + "\"";
}

inline void report(std::ostream& err, const RunStats& stats) {
    for (const auto& e : stats.events)
        event(err, e.name, e.step, "stream=" + std::to_string(e.stream) + " message=" + quoted(e.detail));
}

inline Backend backend_of(const Settings& s) {
    if (s.backend == "float") return Backend::floating;
    if (s.backend == "exact") return Backend::exact;
    throw ValidationError("--backend must be float or exact");
}

inline bool want_json(const Settings& s) {
    if (s.format == "json") return true;
    if (s.format == "csv") return false;
    throw ValidationError("--format must be csv or json");
}

inline PipelineConfig pipeline(const Settings& s) {
    PipelineConfig cfg;
    cfg.pi = parse_permutation(s.pi);
    cfg.steps = s.steps;
    cfg.burn_in = s.burn_in;
    cfg.cap = s.cap;
    cfg.seed = s.seed;
    cfg.streams = s.streams;
    cfg.workers = s.workers;
    if (!s.lambda.empty()) cfg.lambda = parse_doubles(s.lambda);
    if (s.epsilon < 0) throw ValidationError("epsilon must be nonnegative");
    cfg.validate();
    return cfg;
}

inline Word return_word(const Settings& s, const Permutation& pi) {
    if (!s.q.empty()) return parse_word(s.q);
    return find_positive_word(rauzy_class(pi), s.max_len, s.max_count);
}

inline json plateau_json(const PlateauSummary& p) {
    json cps = json::array();
    for (const auto& [n, v] : p.checkpoints) cps.push_back({{"samples", n}, {"value", v}});
    return {{"value", p.value},     {"half_value", p.half_value}, {"samples", p.samples},
            {"gain", p.gain},       {"plateau", p.plateau},       {"checkpoints", cps}};
}

inline json moment_json(const MomentDiagnostic& d) {
    return {{"estimate", d.estimate}, {"quarter", d.quarter}, {"half", d.half},
            {"tail_rate", d.tail_rate}, {"stable", d.stable}};
}

inline json matrix_json(const RenormMatrix& A) {
    json rows = json::array();
    for (std::size_t r = 0; r < A.size(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < A.size(); ++c) {
            const BigInt& e = A(r, c);
            if (e <= BigInt(std::numeric_limits<long long>::max()))
                row.push_back(e.convert_to<long long>());
            else
                row.push_back(e.str());
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace detail

inline int cmd_class(const Settings& s, std::ostream& os) {
    const auto g = rauzy_class(parse_permutation(s.pi));
    if (detail::want_json(s)) {
        json nodes = json::array(), edges = json::array();
        for (const auto& p : g.nodes()) nodes.push_back(to_string(p));
        for (const auto& e : g.edges())
            edges.push_back({{"src", to_string(g.node(e.src))}, {"op", std::string(1, op_char(e.op))},
                             {"dst", to_string(g.node(e.dst))}});
        os << json{{"nodes", nodes}, {"edges", edges}}.dump(2) << '\n';
        return 0;
    }
    os << "index,pi\n";
    for (std::size_t i = 0; i < g.size(); ++i) os << i << ',' << to_string(g.node(i)) << '\n';
    os << '\n';
    write_edges_csv(os, g);
    return 0;
}

inline int cmd_positive_word(const Settings& s, std::ostream& os) {
    const Word q = find_positive_word(rauzy_class(parse_permutation(s.pi)), s.max_len, s.max_count);
    const RenormMatrix A = word_matrix(q);
    if (detail::want_json(s)) {
        os << json{{"word", to_string(q)}, {"length", q.size()}, {"matrix", detail::matrix_json(A)}}.dump(2) << '\n';
        return 0;
    }
    os << to_string(q) << '\n';
    write_matrix_csv(os, A);
    return 0;
}

inline int cmd_orbit(const Settings& s, std::ostream& os, std::ostream& err) {
    const Permutation pi = parse_permutation(s.pi);
    require_irreducible(pi);
    if (s.cap < 1) throw ValidationError("cap must be at least 1");
    const bool as_json = detail::want_json(s);
    const Backend backend = detail::backend_of(s);
    const std::size_t m = pi.size();
    Rng rng(s.seed);
    OrbitOptions opts;
    opts.cap = s.cap;

    json rows = json::array();
    if (!as_json) {
        os << "step,op,count,flow_time";
        for (std::size_t i = 1; i <= m; ++i) os << ",lambda_" << i;
        os << ",pi\n";
    }
    std::size_t step = 0;
    auto emit = [&](const StepRecord& r, const std::vector<double>& lam) {
        if (as_json) {
            rows.push_back({{"step", step},
                            {"op", std::string(1, op_char(r.op))},
                            {"count", r.count},
                            {"flow_time", r.flow_time},
                            {"lambda", lam},
                            {"pi", to_string(r.start)}});
        } else {
            os << step << ',' << op_char(r.op) << ',' << r.count << ',' << format_double(r.flow_time);
            for (double l : lam) os << ',' << format_double(l);
            os << ',' << to_string(r.start) << '\n';
        }
        ++step;
    };

    std::vector<PrecisionEvent> events;
    std::optional<std::pair<std::size_t, std::string>> failure;
    try {
        if (backend == Backend::floating) {
            const FloatPoint x0 = s.lambda.empty() ? sample_simplex(pi, rng) : FloatPoint(parse_doubles(s.lambda), pi);
            events = walk_orbit(x0, s.steps, opts,
                                [&](const OrbitEntry<double>& e) { emit(e.record, e.start.lengths()); });
        } else {
            ExactPoint x0;
            if (s.lambda.empty()) {
                x0 = ExactPoint::from_doubles(sample_simplex(pi, rng).lengths(), pi);
            } else {
                std::vector<Rational> q;
                for (const auto& item : split_commas(s.lambda)) q.push_back(parse_rational(item));
                if (q.size() != m) throw ValidationError("--lambda has the wrong number of entries");
                x0 = ExactPoint::from_rationals(q, pi);
            }
            events = walk_orbit(x0, s.steps, opts,
                                [&](const OrbitEntry<BigInt>& e) { emit(e.record, e.start.lambdas()); });
        }
    } catch (const NumericError& e) {
        failure = {e.step().value_or(step), e.what()};
    }
    if (as_json) {
        json ev = json::array();
        for (const auto& e : events) ev.push_back({{"kind", to_string(e.kind)}, {"step", e.step}});
        os << json{{"pi", to_string(pi)}, {"backend", s.backend}, {"orbit", rows}, {"precision_events", ev}}.dump(2)
           << '\n';
    }
    for (const auto& e : events) detail::event(err, to_string(e.kind), e.step);
    if (failure) {
        detail::event(err, "numeric_error", failure->first, "message=" + detail::quoted(failure->second));
        return 4;
    }
    return 0;
}

inline int cmd_correlations(const Settings& s, std::ostream& os, std::ostream& err) {
    if (detail::backend_of(s) == Backend::exact)
        throw ValidationError("the exact backend is available for orbit and return-times only");
    const bool as_json = detail::want_json(s);
    const PipelineConfig cfg = detail::pipeline(s);
    const Word q = s.observable == "cylinder" || s.psi == "cylinder" ? detail::return_word(s, cfg.pi) : Word{};
    ObservableSpec phi = parse_observable(s.observable, q);
    const ObservableSpec psi = s.psi.empty() ? phi : parse_observable(s.psi, q);
    phi.alpha = s.alpha;
    detail::event(err, "start", 0, "streams=" + std::to_string(cfg.stream_count()));
    const auto run = run_correlations(cfg, phi, psi, s.n_max);
    detail::report(err, run.stats);
    detail::event(err, "done", run.stats.g_steps, "restarts=" + std::to_string(run.stats.restarts));

    json fit_json = nullptr;
    try {
        const auto f = fit_exponential(run.series, s.floor_mult);
        fit_json = {{"delta", f.delta},         {"ci_low", f.ci_low},       {"ci_high", f.ci_high},
                    {"r_squared", f.r_squared}, {"curvature", f.curvature}, {"convex", f.convex},
                    {"flagged", f.flagged},     {"first_lag", f.first_lag}, {"last_lag", f.last_lag}};
        std::ostringstream line;
        line << "delta=" << format_double(f.delta) << " ci_low=" << format_double(f.ci_low)
             << " ci_high=" << format_double(f.ci_high) << " r_squared=" << format_double(f.r_squared)
             << " window=" << f.first_lag << '-' << f.last_lag << " flagged=" << f.flagged;
        detail::event(err, "fit", run.stats.g_steps, line.str());
    } catch (const InsufficientData& e) {
        detail::event(err, "fit_skipped", run.stats.g_steps, "reason=" + detail::quoted(e.what()));
    }

    Rng pair_rng(s.seed, std::uint64_t{1} << 32);
    const auto holder =
        holder_norm_estimate(phi, phi.alpha, sample_holder_pairs(cfg.pi, s.samples ? s.samples : 4096, pair_rng));
    detail::event(err, "holder", run.stats.g_steps,
                  "lower_bound=" + format_double(holder.lower_bound) + " non_holder=" + std::to_string(holder.non_holder));

    if (as_json) {
        json series = json::array();
        for (const auto& p : run.series)
            series.push_back({{"n", p.n}, {"corr", p.corr}, {"stderr", p.stderr}, {"samples", p.samples}});
        os << json{{"observable", phi.name()},
                   {"series", series},
                   {"fit", fit_json},
                   {"holder", {{"sup", holder.sup},
                               {"seminorm", detail::plateau_json(holder.seminorm)},
                               {"lower_bound", holder.lower_bound},
                               {"non_holder", holder.non_holder}}},
                   {"restarts", run.stats.restarts}}
                  .dump(2)
           << '\n';
    } else {
        write_correlations_csv(os, run.series);
    }
    return 0;
}

inline int cmd_return_times(const Settings& s, std::ostream& os, std::ostream& err) {
    const bool as_json = detail::want_json(s);
    if (s.table != "returns" && s.table != "survival") throw ValidationError("--table must be returns or survival");
    ReturnRun run;
    Word q;
    if (detail::backend_of(s) == Backend::floating) {
        const PipelineConfig cfg = detail::pipeline(s);
        q = detail::return_word(s, cfg.pi);
        run = run_returns(cfg, q);
    } else {
        const Permutation pi = parse_permutation(s.pi);
        require_irreducible(pi);
        q = detail::return_word(s, pi);
        ExactPoint x0;
        if (s.lambda.empty()) {
            Rng rng(s.seed);
            x0 = ExactPoint::from_doubles(sample_simplex(pi, rng).lengths(), pi);
        } else {
            std::vector<Rational> v;
            for (const auto& item : split_commas(s.lambda)) v.push_back(parse_rational(item));
            if (v.size() != pi.size()) throw ValidationError("--lambda has the wrong number of entries");
            x0 = ExactPoint::from_rationals(v, pi);
        }
        OrbitOptions opts;
        opts.cap = s.cap;
        run = run_returns_exact(x0, s.steps, q, opts);
    }
    detail::report(err, run.stats);
    if (run.records.empty()) detail::event(err, "warning", run.stats.g_steps, "message=\"q was never observed\"");

    const auto times = return_times(run.records);
    const auto survival = survival_table(times, s.n_max);
    json fit_json = nullptr;
    if (!times.empty()) {
        try {
            const auto f = tail_fit(times, s.n_max);
            fit_json = {{"theta", f.theta}, {"r_squared", f.r_squared}, {"window_end", f.window_end}, {"total", f.total}};
            detail::event(err, "tail_fit", run.stats.g_steps,
                          "theta=" + format_double(f.theta) + " r_squared=" + format_double(f.r_squared) +
                              " window_end=" + std::to_string(f.window_end));
        } catch (const InsufficientData& e) {
            detail::event(err, "tail_fit_skipped", run.stats.g_steps, "reason=" + detail::quoted(e.what()));
        }
    }

    if (as_json) {
        json recs = json::array(), surv = json::array();
        for (const auto& r : run.records)
            recs.push_back({{"idx", r.idx},     {"n_q", r.n_q},       {"eta", r.eta},
                            {"tau", r.tau},     {"len_w", r.len_w},   {"lognorm", r.lognorm},
                            {"start_in_q", r.start_in_q}});
        for (const auto& p : survival) surv.push_back({{"N", p.N}, {"survivors", p.survivors}, {"total", p.total}});
        os << json{{"q", to_string(q)},
                   {"occurrences", run.occurrences},
                   {"records", recs},
                   {"survival", surv},
                   {"tail_fit", fit_json}}
                  .dump(2)
           << '\n';
    } else if (s.table == "returns") {
        write_returns_csv(os, run.records);
    } else {
        write_survival_csv(os, survival);
    }
    if (run.stopped) {
        detail::event(err, "numeric_error", run.stopped->step, "message=" + detail::quoted(run.stopped->detail));
        return 4;
    }
    return 0;
}

inline int cmd_compare(const Settings& s, std::ostream& os, std::ostream& err) {
    if (detail::backend_of(s) == Backend::exact)
        throw ValidationError("the exact backend is available for orbit and return-times only");
    const bool as_json = detail::want_json(s);
    const PipelineConfig cfg = detail::pipeline(s);
    const Word q = detail::return_word(s, cfg.pi);
    const auto run = run_returns(cfg, q, s.samples ? s.samples : 100);
    detail::report(err, run.stats);
    if (run.records.empty()) throw InsufficientData("q was never observed");

    const auto cmp = comparison_survey(run.records);
    const auto mom = return_moments(run.records, s.epsilon);
    std::optional<RatioBounds> ratios;
    if (!run.q_points.empty()) ratios = ratio_bound_check(run.q_points, run.q_matrices);

    if (as_json) {
        json j{{"q", to_string(q)},
               {"records", cmp.records},
               {"word_ratio", detail::plateau_json(cmp.word_ratio)},
               {"eta_minus_tau", detail::plateau_json(cmp.eta_minus_tau)},
               {"violations", cmp.violations},
               {"exp_moment_tau", detail::moment_json(mom.tau)},
               {"exp_moment_n", detail::moment_json(mom.n_q)},
               {"epsilon", s.epsilon}};
        if (ratios) {
            j["length_ratio"] = detail::plateau_json(ratios->max_length_ratio);
            j["norm_ratio"] = detail::plateau_json(ratios->min_norm_ratio);
        }
        os << j.dump(2) << '\n';
        return 0;
    }
    os << "metric,samples,value,flag\n";
    auto plateau_rows = [&](const std::string& name, const PlateauSummary& p) {
        os << name << ',' << p.samples << ',' << format_double(p.value) << ',' << p.plateau << '\n';
        for (const auto& [n, v] : p.checkpoints) os << name << "_running," << n << ',' << format_double(v) << ",\n";
    };
    plateau_rows("word_ratio_max", cmp.word_ratio);
    plateau_rows("eta_minus_tau_max", cmp.eta_minus_tau);
    os << "violations," << cmp.records << ',' << cmp.violations << ",\n";
    os << "exp_moment_tau," << mom.tau.half << ',' << format_double(mom.tau.estimate) << ',' << mom.tau.stable
       << '\n';
    os << "exp_moment_n," << mom.n_q.half << ',' << format_double(mom.n_q.estimate) << ',' << mom.n_q.stable << '\n';
    if (ratios) {
        plateau_rows("length_ratio_max", ratios->max_length_ratio);
        plateau_rows("norm_ratio_min", ratios->min_norm_ratio);
    }
    return 0;
}

inline int cmd_zr_selftest(const Settings& s, std::ostream& os) {
    const bool as_json = detail::want_json(s);
    const auto g = rauzy_class(parse_permutation(s.pi));
    const std::size_t samples = s.samples ? s.samples : 100;
    Rng rng(s.seed);
    std::size_t valid = 0, mismatches = 0;
    double area_err = 0.0, commute = 0.0;
    auto max_diff = [](const ZipperedRectangle<double>& x, const ZipperedRectangle<double>& y) {
        double r = 0.0;
        auto upd = [&](const std::vector<double>& u, const std::vector<double>& v) {
            for (std::size_t i = 0; i < u.size(); ++i)
                r = std::max(r, std::abs(u[i] - v[i]) / std::max(1.0, std::abs(u[i])));
        };
        upd(x.lambda, y.lambda);
        upd(x.h, y.h);
        upd(x.a, y.a);
        return r;
    };
    json rects = json::array();
    for (std::size_t i = 0; i < samples; ++i) {
        const auto x = random_rectangle(g.node(rng.below(g.size())), rng);
        const auto violations = validate(x, 1e-12);
        bool ok = violations.empty();
        const auto y = zip_step(x).rect;
        ok = ok && validate(y, 1e-12).empty();
        area_err = std::max(area_err, std::abs(area(y) - 1.0));
        for (double t : {0.1, 1.0}) commute = std::max(commute, max_diff(flow(y, t), zip_step(flow(x, t)).rect));
        const auto fr = first_return(x).second;
        const auto zs = zorich_step(base_point(x)).second;
        if (!(fr.letter() == zs.letter())) ++mismatches;
        if (ok) ++valid;
        if (as_json) {
            json viol = json::array();
            for (const auto& v : violations) viol.push_back({{"constraint", v.constraint}, {"residual", v.residual}});
            rects.push_back({{"lambda", x.lambda},
                             {"h", x.h},
                             {"a", x.a},
                             {"pi", to_string(x.pi)},
                             {"area", area(x)},
                             {"violations", viol}});
        }
    }
    if (as_json) {
        os << json{{"samples", samples},
                   {"valid", valid},
                   {"max_area_error", area_err},
                   {"max_commutation_residual", commute},
                   {"first_return_mismatches", mismatches},
                   {"rectangles", rects}}
                  .dump(2)
           << '\n';
    } else {
        os << "samples,valid,max_area_error,max_commutation_residual,first_return_mismatches\n";
        os << samples << ',' << valid << ',' << format_double(area_err) << ',' << format_double(commute) << ','
           << mismatches << '\n';
    }
    const bool pass = valid == samples && mismatches == 0 && area_err < 1e-12 && commute < 1e-12;
    return pass ? 0 : 4;
}

namespace detail {

/// Applies config-file values for options not given on the command line.
inline void apply_config(Settings& s, CLI::App& sub) {
    std::ifstream in(s.config);
    if (!in) throw ValidationError("cannot read config file " + s.config);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad config JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config JSON must be an object");
    auto text = [](const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_array()) {
            std::string out;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += v[i].is_number_integer() ? " " : ",";
                out += v[i].is_string() ? v[i].get<std::string>() : v[i].dump();
            }
            return out;
        }
        return v.dump();
    };
    auto lambda_text = [&](const json& v) {
        if (!v.is_array()) return text(v);
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + (v[i].is_string() ? v[i].get<std::string>() : v[i].dump());
        return out;
    };
    using Setter = std::function<void(const json&)>;
    const std::map<std::string, std::pair<std::string, Setter>> keys{
        {"pi", {"--pi", [&](const json& v) { s.pi = text(v); }}},
        {"q", {"--q", [&](const json& v) { s.q = v.get<std::string>(); }}},
        {"steps", {"--steps", [&](const json& v) { s.steps = v.get<std::size_t>(); }}},
        {"burn_in", {"--burn-in", [&](const json& v) { s.burn_in = v.get<std::size_t>(); }}},
        {"n_max", {"--n-max", [&](const json& v) { s.n_max = v.get<std::size_t>(); }}},
        {"cap", {"--cap", [&](const json& v) { s.cap = v.get<std::uint64_t>(); }}},
        {"seed", {"--seed", [&](const json& v) { s.seed = v.get<std::uint64_t>(); }}},
        {"backend", {"--backend", [&](const json& v) { s.backend = v.get<std::string>(); }}},
        {"epsilon", {"--epsilon", [&](const json& v) { s.epsilon = v.get<double>(); }}},
        {"alpha", {"--alpha", [&](const json& v) { s.alpha = v.get<double>(); }}},
        {"floor_mult", {"--floor-mult", [&](const json& v) { s.floor_mult = v.get<double>(); }}},
        {"format", {"--format", [&](const json& v) { s.format = v.get<std::string>(); }}},
        {"out", {"--out", [&](const json& v) { s.out = v.get<std::string>(); }}},
        {"workers", {"--workers", [&](const json& v) { s.workers = v.get<std::size_t>(); }}},
        {"streams", {"--streams", [&](const json& v) { s.streams = v.get<std::size_t>(); }}},
        {"lambda", {"--lambda", [&](const json& v) { s.lambda = lambda_text(v); }}},
        {"max_len", {"--max-len", [&](const json& v) { s.max_len = v.get<std::size_t>(); }}},
        {"max_count", {"--max-count", [&](const json& v) { s.max_count = v.get<std::uint64_t>(); }}},
        {"samples", {"--samples", [&](const json& v) { s.samples = v.get<std::size_t>(); }}},
        {"observable", {"--observable", [&](const json& v) { s.observable = v.get<std::string>(); }}},
        {"psi", {"--psi", [&](const json& v) { s.psi = v.get<std::string>(); }}},
        {"table", {"--table", [&](const json& v) { s.table = v.get<std::string>(); }}},
    };
    for (const auto& [key, value] : j.items()) {
        const auto it = keys.find(key);
        if (it == keys.end()) throw ValidationError("unknown config key '" + key + "'");
        const CLI::Option* opt = sub.get_option_no_throw(it->second.first);
        // keys that do not apply to this subcommand are ignored
        if (opt == nullptr || opt->count() > 0) continue;
        try {
            it->second.second(value);
        } catch (const json::exception&) {
            throw ValidationError("config key '" + key + "' has the wrong type");
        }
    }
}

}  // namespace detail

/// Parses arguments and runs one subcommand; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rauzy-Veech induction, Zorich acceleration and their statistics"};
    app.require_subcommand(1);
    Settings s;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--pi", s.pi, "Permutation, e.g. \"3 2 1\" (required, here or in --config)");
        sub->add_option("--out", s.out, "Output path (default stdout)");
        sub->add_option("--format", s.format, "csv or json")->capture_default_str();
        sub->add_option("--config", s.config, "JSON config; command-line flags take precedence");
    };
    auto word_opts = [&](CLI::App* sub) {
        sub->add_option("--max-len", s.max_len, "Longest word searched")->capture_default_str();
        sub->add_option("--max-count", s.max_count, "Largest letter count searched")->capture_default_str();
    };
    auto orbit_opts = [&](CLI::App* sub) {
        sub->add_option("--steps", s.steps, "Zorich steps")->capture_default_str();
        sub->add_option("--seed", s.seed, "Random seed")->capture_default_str();
        sub->add_option("--cap", s.cap, "Largest Rauzy-Veech run per Zorich step")->capture_default_str();
        sub->add_option("--backend", s.backend, "float or exact")->capture_default_str();
        sub->add_option("--lambda", s.lambda, "Starting lengths, comma separated (exact: decimals or p/q)");
    };
    auto pipeline_opts = [&](CLI::App* sub) {
        orbit_opts(sub);
        sub->add_option("--burn-in", s.burn_in, "Steps discarded per segment")->capture_default_str();
        sub->add_option("--n-max", s.n_max, "Largest lag or survival N")->capture_default_str();
        sub->add_option("--workers", s.workers, "Worker threads")->capture_default_str();
        sub->add_option("--streams", s.streams, "Independent seed streams")->capture_default_str();
        sub->add_option("--q", s.q, "Return word, e.g. \"a:1@2 1;b:1@2 1\" (default: shortest positive word)");
        word_opts(sub);
    };

    auto* cls = app.add_subcommand("class", "Rauzy class nodes and edges");
    common(cls);
    auto* pos = app.add_subcommand("positive-word", "Shortest word with a positive matrix");
    common(pos);
    word_opts(pos);
    auto* orb = app.add_subcommand("orbit", "Zorich orbit records");
    common(orb);
    orbit_opts(orb);
    auto* cor = app.add_subcommand("correlations", "Correlation series and exponential fit");
    common(cor);
    pipeline_opts(cor);
    cor->add_option("--observable", s.observable, "lambda_i, coordinate:i, log_min_gap or cylinder")
        ->capture_default_str();
    cor->add_option("--psi", s.psi, "Second observable (default: same as --observable)");
    cor->add_option("--floor-mult", s.floor_mult, "Noise floor multiplier for the fit window")->capture_default_str();
    cor->add_option("--alpha", s.alpha, "Hölder exponent")->capture_default_str();
    cor->add_option("--samples", s.samples, "Point pairs for the Hölder estimate (default 4096)");
    auto* ret = app.add_subcommand("return-times", "Returns to the cylinder of q");
    common(ret);
    pipeline_opts(ret);
    ret->add_option("--table", s.table, "returns or survival")->capture_default_str();
    auto* cmp = app.add_subcommand("compare", "Norm/time comparisons, moments and ratio bounds");
    common(cmp);
    pipeline_opts(cmp);
    cmp->add_option("--epsilon", s.epsilon, "Exponent of the exponential moments")->capture_default_str();
    cmp->add_option("--samples", s.samples, "Delta_q points and matrices kept per stream (default 100)");
    auto* zr = app.add_subcommand("zr-selftest", "Zippered rectangle self-test");
    common(zr);
    zr->add_option("--samples", s.samples, "Random rectangles (default 100)");
    zr->add_option("--seed", s.seed, "Random seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        if (!s.config.empty()) detail::apply_config(s, *sub);
        if (s.pi.empty()) throw ValidationError("--pi is required");
        std::ofstream file;
        if (!s.out.empty()) {
            file.open(s.out);
            if (!file) throw ValidationError("cannot open " + s.out);
        }
        std::ostream& os = s.out.empty() ? out : file;
        const std::string name = sub->get_name();
        if (name == "class") return cmd_class(s, os);
        if (name == "positive-word") return cmd_positive_word(s, os);
        if (name == "orbit") return cmd_orbit(s, os, err);
        if (name == "correlations") return cmd_correlations(s, os, err);
        if (name == "return-times") return cmd_return_times(s, os, err);
        if (name == "compare") return cmd_compare(s, os, err);
        return cmd_zr_selftest(s, os);
    } catch (const NotFound& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        detail::event(err, "numeric_error", e.step().value_or(0), "message=" + detail::quoted(e.what()));
        return 4;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace rauzy::cli
