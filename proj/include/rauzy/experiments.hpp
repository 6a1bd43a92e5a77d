#pragma once

/**
 * @file experiments.hpp
 * @brief Monte-Carlo pipelines over independent seed streams: correlation
 * series and return-time surveys, plus the summaries built from them.
 *
 * The work is split into a fixed number of streams, each driven by
 * Rng(seed, stream).  Workers only decide which thread runs a stream, and
 * results are merged in stream order, so outputs do not depend on the worker
 * count.
 */

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rauzy/kernel.hpp"
#include "rauzy/observable.hpp"
#include "rauzy/random.hpp"
#include "rauzy/returns.hpp"
#include "rauzy/statistics.hpp"

namespace rauzy {

struct PipelineConfig {
    Permutation pi;
    /// G-steps over all streams, burn-in included.
    std::size_t steps = 1'000'000;
    /// G-steps discarded at the start of every segment.
    std::size_t burn_in = 1000;
    std::uint64_t cap = default_cap;
    std::uint64_t seed = 1;
    std::size_t streams = 8;
    std::size_t workers = 1;
    /// Fixed starting lengths; forces a single stream.
    std::optional<std::vector<double>> lambda;

    void validate() const {
        require_irreducible(pi);
        if (steps <= burn_in) throw ValidationError("steps must exceed burn_in");
        if (cap < 1) throw ValidationError("cap must be at least 1");
        if (streams < 1) throw ValidationError("streams must be at least 1");
        if (lambda && lambda->size() != pi.size()) throw ValidationError("--lambda has the wrong number of entries");
        if (stream_steps(stream_count() - 1) <= burn_in)
            throw ValidationError("each stream needs more than burn_in steps; lower --streams or raise --steps");
    }

    [[nodiscard]] std::size_t stream_count() const noexcept { return lambda ? 1 : streams; }

    /// Step budget of stream s.
    [[nodiscard]] std::size_t stream_steps(std::size_t s) const noexcept {
        const auto n = stream_count();
        return steps / n + (s < steps % n ? 1 : 0);
    }
};

/// A structured progress event, printed as `event=<name> step=<k>`.
struct RunEvent {
    std::string name;
    std::size_t stream = 0;
    std::size_t step = 0;
    std::string detail;
};

struct RunStats {
    std::size_t g_steps = 0;
    std::size_t measured_steps = 0;
    std::size_t restarts = 0;
    std::vector<RunEvent> events;
};

namespace detail {

/// Runs one stream.  `state` provides begin_segment() and
/// on_step(start_lengths, node, letter, index); numeric failures restart the
/// segment from a fresh sample.
template <class State>
void run_stream(const PipelineConfig& cfg, const ClassDynamics& dyn, std::size_t s, State& state, RunStats& stats) {
    Rng rng(cfg.seed, s);
    const std::size_t budget = cfg.stream_steps(s);
    const std::size_t start_node = dyn.node_of(cfg.pi);
    std::vector<double> lambda, before;
    bool first = true;
    std::size_t done = 0;
    while (done < budget) {
        lambda = (first && cfg.lambda) ? FloatPoint(*cfg.lambda, cfg.pi).lengths() : sample_simplex(cfg.pi, rng).lengths();
        first = false;
        std::size_t node = start_node;
        std::size_t seg = 0;
        state.begin_segment();
        try {
            for (; done < budget; ++done, ++seg) {
                if (seg < cfg.burn_in) {
                    (void)dyn.zorich(lambda, node, cfg.cap);
                    continue;
                }
                before = lambda;
                const std::size_t n0 = node;
                const NodeLetter l = dyn.zorich(lambda, node, cfg.cap);
                state.on_step(before, n0, l, done);
                ++stats.measured_steps;
            }
        } catch (const NonGeneric& e) {
            stats.events.push_back({"restart_non_generic", s, done, e.what()});
            ++stats.restarts;
            ++done;
        } catch (const CapExceeded& e) {
            stats.events.push_back({"restart_cap_exceeded", s, done, e.what()});
            ++stats.restarts;
            ++done;
        }
    }
    stats.g_steps = budget;
}

/// Runs every stream on up to cfg.workers threads.
template <class State, class Make>
std::vector<State> run_streams(const PipelineConfig& cfg, const ClassDynamics& dyn, Make make,
                               std::vector<RunStats>& stats) {
    const std::size_t n = cfg.stream_count();
    std::vector<State> states;
    states.reserve(n);
    for (std::size_t s = 0; s < n; ++s) states.push_back(make(s));
    stats.assign(n, RunStats{});
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t s = next++;
            if (s >= n) return;
            try {
                run_stream(cfg, dyn, s, states[s], stats[s]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(cfg.workers, 1, n);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return states;
}

inline RunStats merge_stats(const std::vector<RunStats>& parts) {
    RunStats out;
    for (const auto& p : parts) {
        out.g_steps += p.g_steps;
        out.measured_steps += p.measured_steps;
        out.restarts += p.restarts;
        out.events.insert(out.events.end(), p.events.begin(), p.events.end());
    }
    return out;
}

}  // namespace detail

struct CorrelationRun {
    std::vector<CorrelationPoint> series;
    RunStats stats;
};

/// Lagged covariances of phi and psi over the plus-type points of the
/// streams' orbits; lag n means n steps of G^2.
[[nodiscard]] inline CorrelationRun run_correlations(const PipelineConfig& cfg, const ObservableSpec& phi,
                                                     const ObservableSpec& psi, std::size_t n_max) {
    cfg.validate();
    const std::size_t streams = cfg.stream_count();
    const std::size_t measured = cfg.steps - streams * cfg.burn_in;
    if (measured / 2 <= 10 * n_max) throw InsufficientData("orbit too short: need (steps - burn_in)/2 > 10 n_max");
    // about 16 blocks per batch of sqrt(N) pairs
    const auto block = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(measured / 2.0) / 16.0));
    const ClassDynamics dyn(rauzy_class(cfg.pi));

    struct State {
        const ClassDynamics* dyn;
        const ObservableSpec* phi;
        const ObservableSpec* psi;
        CorrelationAccumulator acc;
        void begin_segment() { acc.begin_segment(); }
        void on_step(const std::vector<double>& x, std::size_t node, const NodeLetter&, std::size_t) {
            if (dyn->classify(x, node) != PointType::plus) return;
            const Permutation& pi = dyn->graph().node(node);
            acc.push((*phi)(x, pi), (*psi)(x, pi));
        }
    };
    std::vector<RunStats> stats;
    auto states = detail::run_streams<State>(
        cfg, dyn, [&](std::size_t) { return State{&dyn, &phi, &psi, CorrelationAccumulator(n_max, block)}; }, stats);
    for (std::size_t s = 1; s < states.size(); ++s) states[0].acc.merge(states[s].acc);
    return {states[0].acc.series(), detail::merge_stats(stats)};
}

struct ReturnRun {
    std::vector<ReturnRecord> records;
    std::size_t occurrences = 0;
    /// Sampled points of Delta_q and gap matrices of returns to Delta_q.
    std::vector<FloatPoint> q_points;
    std::vector<RenormMatrix> q_matrices;
    RunStats stats;
    /// Set when an exact orbit stopped at a numeric failure.
    std::optional<RunEvent> stopped;
};

/// Gap records for q along the streams' float orbits.  keep_samples bounds
/// the Delta_q points and gap matrices kept per stream.
[[nodiscard]] inline ReturnRun run_returns(const PipelineConfig& cfg, const Word& q, std::size_t keep_samples = 0) {
    cfg.validate();
    const ClassDynamics dyn(rauzy_class(cfg.pi));
    struct State {
        ReturnScanner scanner;
        void begin_segment() { scanner.begin_segment(); }
        void on_step(const std::vector<double>& x, std::size_t, const NodeLetter& l, std::size_t index) {
            scanner.push(l, index, x);
        }
    };
    std::vector<RunStats> stats;
    auto states = detail::run_streams<State>(
        cfg, dyn, [&](std::size_t) { return State{ReturnScanner(dyn, q, keep_samples)}; }, stats);
    ReturnRun out;
    for (auto& st : states) {
        auto recs = st.scanner.take_records();
        out.records.insert(out.records.end(), recs.begin(), recs.end());
        out.occurrences += st.scanner.occurrences();
        out.q_points.insert(out.q_points.end(), st.scanner.q_points().begin(), st.scanner.q_points().end());
        out.q_matrices.insert(out.q_matrices.end(), st.scanner.q_matrices().begin(), st.scanner.q_matrices().end());
    }
    out.stats = detail::merge_stats(stats);
    return out;
}

/// Gap records for q along one exact orbit of x0.  The orbit stops at the
/// first numeric failure; records up to that point are kept.
[[nodiscard]] inline ReturnRun run_returns_exact(const ExactPoint& x0, std::size_t steps, const Word& q,
                                                 const OrbitOptions& opts = {}) {
    const ClassDynamics dyn(rauzy_class(x0.pi()));
    ReturnScanner scanner(dyn, q);
    ReturnRun out;
    std::size_t index = 0;
    try {
        walk_orbit(x0, steps, opts, [&](const OrbitEntry<BigInt>& e) {
            scanner.push(dyn.to_node_letter(e.record.letter(), e.record.flow_time), index++);
        });
    } catch (const NumericError& e) {
        out.stopped = RunEvent{"numeric_error", 0, e.step().value_or(index), e.what()};
    }
    out.records = scanner.take_records();
    out.occurrences = scanner.occurrences();
    out.stats.g_steps = index;
    out.stats.measured_steps = index;
    return out;
}

/// Records whose gap starts in Delta_q: the complete returns.
[[nodiscard]] inline std::vector<ReturnRecord> complete_returns(const std::vector<ReturnRecord>& records) {
    std::vector<ReturnRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out), [](const auto& r) { return r.start_in_q; });
    return out;
}

[[nodiscard]] inline std::vector<std::uint64_t> return_times(const std::vector<ReturnRecord>& records) {
    std::vector<std::uint64_t> out;
    for (const auto& r : records)
        if (r.start_in_q) out.push_back(r.n_q);
    return out;
}

struct ComparisonSummary {
    /// Running max of |w| / log matrix_norm(A(w)) over all gap words.
    PlateauSummary word_ratio;
    /// Running max of eta - tau over gaps starting in Delta_q.
    PlateauSummary eta_minus_tau;
    /// Records with eta <= tau.
    std::size_t violations = 0;
    std::size_t records = 0;
};

[[nodiscard]] inline ComparisonSummary comparison_survey(const std::vector<ReturnRecord>& records) {
    ComparisonSummary s;
    s.records = records.size();
    std::vector<double> ratios, gaps;
    for (const auto& r : records) {
        ratios.push_back(static_cast<double>(r.n_q) / r.eta);
        if (r.start_in_q) gaps.push_back(r.eta - r.tau);
        if (!(r.eta > r.tau)) ++s.violations;
    }
    s.word_ratio = running_extreme(ratios, true);
    s.eta_minus_tau = running_extreme(gaps, true);
    return s;
}

struct ReturnMoments {
    MomentDiagnostic tau;
    MomentDiagnostic n_q;
};

/// Exponential moments of tau_q and n_q over the complete returns.
[[nodiscard]] inline ReturnMoments return_moments(const std::vector<ReturnRecord>& records, double eps) {
    std::vector<double> taus, ns;
    for (const auto& r : records) {
        if (!r.start_in_q) continue;
        taus.push_back(r.tau);
        ns.push_back(static_cast<double>(r.n_q));
    }
    return {exp_moment(taus, eps), exp_moment(ns, eps)};
}

}  // namespace rauzy
