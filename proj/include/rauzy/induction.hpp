#pragma once

/**
 * @file induction.hpp
 * @brief The Rauzy-Veech step T, the Zorich acceleration G, inverse branches
 * and orbits.
 *
 * The branch of T is the one for which A(c, pi)^{-1} lambda stays positive:
 * c = a on plus-type points, c = b on minus-type points.  G iterates T for as
 * long as the type does not change, so G maps plus-type points to minus-type
 * points and back.
 */

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "rauzy/cocycle.hpp"
#include "rauzy/point.hpp"
#include "rauzy/word.hpp"

namespace rauzy {

inline constexpr std::uint64_t default_cap = std::uint64_t{1} << 20;

template <class T>
struct RauzyStep {
    IetPoint<T> point;
    Op op;
    /// -log |A^{-1} lambda| for normalized lambda: the suspension time of the step.
    double flow_time;
};

struct StepRecord {
    Op op = Op::a;
    std::uint64_t count = 0;
    Permutation start;
    double flow_time = 0.0;

    [[nodiscard]] Letter letter() const { return Letter(op, count, start); }
};

namespace detail {

/// One T-step on raw lengths.  Doubles are renormalized to |lambda| = 1.
template <class T>
double rauzy_update(Op op, std::size_t k, std::vector<T>& lengths) {
    const auto m = lengths.size();
    if constexpr (std::is_same_v<T, double>) {
        const double loss = std::min(lengths[k - 1], lengths[m - 1]);
        inverse_apply_in_place(op, k, lengths);
        double s = 0.0;
        for (double l : lengths) s += l;
        for (double& l : lengths) l /= s;
        return -std::log1p(-loss);
    } else {
        BigInt before = 0;
        for (const auto& l : lengths) before += l;
        inverse_apply_in_place(op, k, lengths);
        BigInt after = 0;
        for (const auto& l : lengths) after += l;
        return log_ratio(before, after);
    }
}

[[nodiscard]] inline Op branch_for(PointType t) { return t == PointType::plus ? Op::a : Op::b; }

/// Zorich run with a per-substep hook; returns the record and the G-image.
template <class T, class Hook>
std::pair<IetPoint<T>, StepRecord> zorich_run(const IetPoint<T>& x, std::uint64_t cap, Hook&& hook) {
    const PointType type0 = classify(x);
    if (type0 == PointType::boundary) throw NonGeneric("point lies on the boundary lambda_m = lambda_{pi^-1 m}");
    const Op op = branch_for(type0);
    std::vector<T> lengths = x.lengths();
    Permutation pi = x.pi();
    StepRecord rec{op, 0, x.pi(), 0.0};
    for (;;) {
        if (rec.count == cap) throw CapExceeded("Zorich run exceeded the cap of " + std::to_string(cap) + " steps");
        const auto k = static_cast<std::size_t>(pi.last_bottom());
        rec.flow_time += rauzy_update(op, k, lengths);
        pi = apply(op, pi);
        ++rec.count;
        IetPoint<T> cur(typename IetPoint<T>::trusted_t{}, lengths, pi);
        const PointType t = classify(cur);
        hook(cur, t);
        if (t == PointType::boundary) throw NonGeneric("Rauzy-Veech step landed on the boundary");
        if (t != type0) return {std::move(cur), std::move(rec)};
    }
}

}  // namespace detail

template <class T>
[[nodiscard]] RauzyStep<T> rauzy_step(const IetPoint<T>& x) {
    const PointType t = classify(x);
    if (t == PointType::boundary) throw NonGeneric("point lies on the boundary lambda_m = lambda_{pi^-1 m}");
    const Op op = detail::branch_for(t);
    std::vector<T> lengths = x.lengths();
    const double ft = detail::rauzy_update(op, static_cast<std::size_t>(x.pi().last_bottom()), lengths);
    return {IetPoint<T>(typename IetPoint<T>::trusted_t{}, std::move(lengths), apply(op, x.pi())), op, ft};
}

/// G(x) together with its letter (c, n(x), pi) and flow time.
template <class T>
[[nodiscard]] std::pair<IetPoint<T>, StepRecord> zorich_step(const IetPoint<T>& x, std::uint64_t cap = default_cap) {
    return detail::zorich_run(x, cap, [](const IetPoint<T>&, PointType) {});
}

/// (A(w) lambda normalized, starting permutation of w).  The word must act on
/// some permutation and land on x's permutation.
template <class T>
[[nodiscard]] IetPoint<T> inverse_branch(const Word& w, const IetPoint<T>& x) {
    if (w.empty()) return x;
    const auto end = word_action(w, w.front().pi);
    if (!end || !(*end == x.pi())) throw ValidationError("word does not end at the point's permutation");
    const RenormMatrix A = word_matrix(w);
    if constexpr (std::is_same_v<T, double>) {
        return IetPoint<T>(A.apply(x.lengths()), w.front().pi);
    } else {
        return IetPoint<T>(A.template apply<BigInt>(x.lengths()), w.front().pi);
    }
}

struct PrecisionEvent {
    enum class Kind { tiny_length, uncertain_branch };
    /// First G-step whose record is no longer certified.
    std::size_t step;
    Kind kind;
};

[[nodiscard]] constexpr const char* to_string(PrecisionEvent::Kind k) noexcept {
    return k == PrecisionEvent::Kind::tiny_length ? "tiny_length" : "uncertain_branch";
}

struct OrbitOptions {
    std::uint64_t cap = default_cap;
    /// Floats: minimum length below which a precision event is recorded.
    double tiny_length = 1e-13;
    /// Exact backend: bound on the bit size of |v|.
    std::size_t max_denominator_bits = 1u << 16;
};

template <class T>
struct OrbitEntry {
    IetPoint<T> start;
    StepRecord record;
};

template <class T>
struct Orbit {
    std::vector<OrbitEntry<T>> entries;
    std::vector<PrecisionEvent> events;
};

namespace detail {

/// Running bound on the coordinatewise relative error of a float orbit.
/// Subtracting nearly equal lengths amplifies it by (big + small) / (big - small);
/// a comparison is uncertain once the gap is within the bound.
class ErrorTracker {
public:
    explicit ErrorTracker(std::size_t m) : unit_(static_cast<double>(m + 2) * 0x1p-53), bound_(unit_) {}

    /// Returns false once a branch decision can no longer be certified.
    bool observe(const std::vector<double>& before, std::size_t k) {
        const auto m = before.size();
        const double p = before[k - 1], q = before[m - 1];
        const double big = std::max(p, q), small = std::min(p, q);
        if (big - small <= 4.0 * bound_ * big) return false;
        bound_ = std::max(bound_, bound_ * (big + small) / (big - small)) + unit_;
        return true;
    }

    [[nodiscard]] double bound() const noexcept { return bound_; }

private:
    double unit_;
    double bound_;
};

}  // namespace detail

/// Streams `steps` Zorich steps to `sink(const OrbitEntry<T>&)`.  Numeric
/// failures propagate with the failing step index; the first precision event
/// of each kind is returned.
template <class T, class Sink>
std::vector<PrecisionEvent> walk_orbit(const IetPoint<T>& x0, std::size_t steps, const OrbitOptions& opts, Sink&& sink) {
    std::vector<PrecisionEvent> events;
    IetPoint<T> x = x0;
    [[maybe_unused]] detail::ErrorTracker tracker(x0.size());
    bool certified = true;
    [[maybe_unused]] bool tiny_seen = false;
    for (std::size_t s = 0; s < steps; ++s) {
        try {
            if constexpr (std::is_same_v<T, BigInt>) {
                if (x.denominator_bits() > opts.max_denominator_bits)
                    throw DenominatorOverflow("denominator exceeds " + std::to_string(opts.max_denominator_bits) +
                                              " bits");
            }
            std::optional<std::pair<IetPoint<T>, StepRecord>> next;
            if constexpr (std::is_same_v<T, double>) {
                if (s == 0 && !tracker.observe(x.lengths(), static_cast<std::size_t>(x.pi().last_bottom()))) {
                    certified = false;
                    events.push_back({s, PrecisionEvent::Kind::uncertain_branch});
                }
                // every later comparison is checked right after the substep that produced it
                next = detail::zorich_run(x, opts.cap, [&](const IetPoint<T>& cur, PointType) {
                    if (certified && !tracker.observe(cur.lengths(), static_cast<std::size_t>(cur.pi().last_bottom()))) {
                        certified = false;
                        events.push_back({s, PrecisionEvent::Kind::uncertain_branch});
                    }
                });
            } else {
                next = zorich_step(x, opts.cap);
            }
            sink(OrbitEntry<T>{x, next->second});
            x = std::move(next->first);
            if constexpr (std::is_same_v<T, double>) {
                const double mn = *std::min_element(x.lengths().begin(), x.lengths().end());
                if (mn < opts.tiny_length && !tiny_seen) {
                    tiny_seen = true;
                    events.push_back({s + 1, PrecisionEvent::Kind::tiny_length});
                }
            }
        } catch (NumericError& e) {
            e.set_step(s);
            throw;
        }
    }
    return events;
}

template <class T>
[[nodiscard]] Orbit<T> orbit(const IetPoint<T>& x0, std::size_t steps, const OrbitOptions& opts = {}) {
    Orbit<T> out;
    out.entries.reserve(steps);
    out.events = walk_orbit(x0, steps, opts, [&](const OrbitEntry<T>& e) { out.entries.push_back(e); });
    return out;
}

}  // namespace rauzy
