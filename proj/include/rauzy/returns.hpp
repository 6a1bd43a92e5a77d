#pragma once

/**
 * @file returns.hpp
 * @brief Returns of a Zorich itinerary to the cylinder of a word q, and the
 * shrinking of prefix cylinders along recurrences of q.
 */

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "rauzy/cocycle.hpp"
#include "rauzy/kernel.hpp"
#include "rauzy/rauzy_class.hpp"
#include "rauzy/symbolic.hpp"

namespace rauzy {

/// Nonnegative matrix kept as double entries times exp(log_scale); used to
/// follow log-norms of long cocycle products.
class LogScaledMatrix {
public:
    explicit LogScaledMatrix(std::size_t m = 0) : rows_(m, std::vector<double>(m, 0.0)) {
        for (std::size_t i = 0; i < m; ++i) rows_[i][i] = 1.0;
    }

    /// this <- this * A(op, pi) with k = pi^{-1}(m) (1-based).
    void right_multiply_elementary(Op op, std::size_t k) {
        for (auto& row : rows_) transpose_apply_in_place(op, k, row);
    }

    /// Rescales by a power of two (exactly) once entries grow past 2^300.
    void rescale() {
        const double top = max_raw();
        if (top < 0x1p300) return;
        int exp = 0;
        (void)std::frexp(top, &exp);
        for (auto& row : rows_)
            for (double& e : row) e = std::ldexp(e, -exp);
        log_scale_ += exp * std::numbers::ln2;
    }

    /// log of the entry sum.
    [[nodiscard]] double log_norm() const {
        double s = 0.0;
        for (const auto& row : rows_)
            for (double e : row) s += e;
        return std::log(s) + log_scale_;
    }

    [[nodiscard]] double log_max_entry() const { return std::log(max_raw()) + log_scale_; }

    /// Birkhoff diameter of the image cone, as for RenormMatrix.
    [[nodiscard]] double birkhoff_diameter() const {
        const auto m = rows_.size();
        double best = 0.0;
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t l = 0; l < m; ++l) {
                if (k == l) continue;
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < m; ++j) {
                        if (i == j) continue;
                        const double num = rows_[i][k] * rows_[j][l];
                        const double den = rows_[j][k] * rows_[i][l];
                        if (den == 0.0) {
                            if (num > 0.0) return std::numeric_limits<double>::infinity();
                            continue;
                        }
                        if (num > den) best = std::max(best, std::log(num / den));
                    }
            }
        return best;
    }

private:
    [[nodiscard]] double max_raw() const {
        double top = 0.0;
        for (const auto& row : rows_)
            for (double e : row) top = std::max(top, e);
        return top;
    }

    std::vector<std::vector<double>> rows_;
    double log_scale_ = 0.0;
};

/// One gap of the itinerary between an occurrence of q (or a segment start)
/// and the next occurrence of q.
struct ReturnRecord {
    /// G-step index at which the gap starts.
    std::size_t idx = 0;
    /// Number of letters in the gap word w.
    std::uint64_t n_q = 0;
    /// log matrix_norm(A(w)).
    double eta = 0.0;
    /// Accumulated flow time over the gap.
    double tau = 0.0;
    /// Rauzy-Veech steps in the gap.
    std::uint64_t len_w = 0;
    /// log of the largest entry of A(w).
    double lognorm = 0.0;
    /// The gap starts at an occurrence of q.
    bool start_in_q = false;
};

/// Streaming scanner: feed letters in order with their G-step index; records
/// are emitted when an occurrence of q closes a gap.  Occurrences may overlap.
class ReturnScanner {
public:
    ReturnScanner(const ClassDynamics& dyn, const Word& q, std::size_t keep_samples = 0)
        : dyn_(&dyn), keep_samples_(keep_samples) {
        if (q.empty()) throw ValidationError("the return word q is empty");
        for (const auto& l : q.letters()) q_.push_back(dyn.to_node_letter(l));
    }

    /// Starts a new segment; an unfinished gap is dropped.
    void begin_segment() {
        window_.clear();
        gap_open_ = false;
        first_gap_ = true;
    }

    /// Feeds the letter at G-step `index`, read at the point with lengths `start`.
    void push(const NodeLetter& letter, std::size_t index, std::span<const double> start = {}) {
        Pending p{letter, index, {}};
        if (keep_samples_ > points_.size()) p.start.assign(start.begin(), start.end());
        window_.push_back(std::move(p));
        if (window_.size() == q_.size()) process_front();
    }

    [[nodiscard]] const std::vector<ReturnRecord>& records() const noexcept { return records_; }
    [[nodiscard]] std::vector<ReturnRecord> take_records() { return std::move(records_); }
    [[nodiscard]] std::size_t occurrences() const noexcept { return occurrences_; }
    /// Up to keep_samples points of Delta_q met along the itinerary.
    [[nodiscard]] const std::vector<FloatPoint>& q_points() const noexcept { return points_; }
    /// Up to keep_samples gap matrices A(w) of gaps starting in Delta_q.
    [[nodiscard]] const std::vector<RenormMatrix>& q_matrices() const noexcept { return matrices_; }

private:
    struct Pending {
        NodeLetter letter;
        std::size_t index;
        std::vector<double> start;
    };

    void process_front() {
        bool match = true;
        for (std::size_t i = 0; i < q_.size() && match; ++i) match = window_[i].letter.same_letter(q_[i]);
        Pending& front = window_.front();
        if (match) {
            ++occurrences_;
            if (gap_open_) close_gap();
            if (!front.start.empty() && points_.size() < keep_samples_)
                points_.emplace_back(FloatPoint::trusted_t{}, front.start, dyn_->graph().node(front.letter.start));
            open_gap(front.index, true);
        } else if (!gap_open_ && first_gap_) {
            open_gap(front.index, false);
        }
        first_gap_ = false;
        if (gap_open_) add_letter(front.letter);
        window_.pop_front();
    }

    void open_gap(std::size_t index, bool in_q) {
        gap_open_ = true;
        current_ = ReturnRecord{};
        current_.idx = index;
        current_.start_in_q = in_q;
        matrix_ = LogScaledMatrix(dyn_->m());
        gap_letters_.clear();
        keep_letters_ = in_q && matrices_.size() < keep_samples_;
    }

    void add_letter(const NodeLetter& l) {
        std::size_t node = l.start;
        for (std::uint64_t s = 0; s < l.count; ++s) {
            matrix_.right_multiply_elementary(l.op, dyn_->k(node));
            node = dyn_->next(node, l.op);
        }
        matrix_.rescale();
        if (keep_letters_) gap_letters_.push_back(l);
        ++current_.n_q;
        current_.tau += l.flow_time;
        current_.len_w += l.count;
    }

    void close_gap() {
        current_.eta = matrix_.log_norm();
        current_.lognorm = matrix_.log_max_entry();
        if (keep_letters_) matrices_.push_back(exact_matrix(gap_letters_));
        records_.push_back(current_);
        gap_open_ = false;
    }

    [[nodiscard]] RenormMatrix exact_matrix(const std::vector<NodeLetter>& letters) const {
        RenormMatrix A = RenormMatrix::identity(dyn_->m());
        for (const auto& l : letters) {
            std::size_t node = l.start;
            for (std::uint64_t s = 0; s < l.count; ++s) {
                right_multiply_elementary(A, l.op, dyn_->k(node));
                node = dyn_->next(node, l.op);
            }
        }
        return A;
    }

    const ClassDynamics* dyn_;
    std::vector<NodeLetter> q_;
    std::size_t keep_samples_;
    std::deque<Pending> window_;
    bool gap_open_ = false;
    bool first_gap_ = true;
    ReturnRecord current_;
    LogScaledMatrix matrix_;
    std::vector<NodeLetter> gap_letters_;
    bool keep_letters_ = false;
    std::vector<ReturnRecord> records_;
    std::size_t occurrences_ = 0;
    std::vector<FloatPoint> points_;
    std::vector<RenormMatrix> matrices_;
};

/// Gap records of an orbit with respect to q.  Empty when q never occurs.
template <class T>
[[nodiscard]] std::vector<ReturnRecord> return_time_survey(const Orbit<T>& orbit, const Word& q) {
    if (orbit.entries.empty()) return {};
    const ClassDynamics dyn(rauzy_class(orbit.entries.front().start.pi()));
    ReturnScanner scanner(dyn, q);
    for (std::size_t i = 0; i < orbit.entries.size(); ++i) {
        const auto& r = orbit.entries[i].record;
        scanner.push(dyn.to_node_letter(r.letter(), r.flow_time), i);
    }
    return scanner.take_records();
}

/// Hilbert diameters of the prefix cylinders ending with successive disjoint
/// occurrences of q along an itinerary.
struct ShrinkProfile {
    /// birkhoff_diameter(A(q)).
    double q_diameter = 0.0;
    /// tanh(q_diameter / 4).
    double contraction = 0.0;
    /// diameters[k] is the diameter after k + 1 occurrences.
    std::vector<double> diameters;
    /// errors[k] bounds the rounding error of diameters[k].
    std::vector<double> errors;

    /// Largest (D_k / q_diameter)^(1/k) over k >= 1.
    [[nodiscard]] double per_occurrence_factor() const {
        double f = 0.0;
        for (std::size_t k = 1; k < diameters.size(); ++k)
            f = std::max(f, std::pow(diameters[k] / q_diameter, 1.0 / static_cast<double>(k)));
        return f;
    }

    /// Occurrences after which the diameter is certainly below eps.
    [[nodiscard]] std::optional<std::size_t> occurrences_to(double eps) const {
        for (std::size_t k = 0; k < diameters.size(); ++k)
            if (diameters[k] + errors[k] < eps) return k + 1;
        return std::nullopt;
    }
};

/// Profile of an itinerary given as node letters; stops once the diameter
/// drops below stop_below.  Products are kept in floating point: every
/// elementary step adds nonnegative entries, so after n steps each entry has
/// relative error at most n u / (1 - n u) and a cross-ratio log at most four
/// times that (plus the rounding of the ratio itself).
[[nodiscard]] inline ShrinkProfile cylinder_shrink_profile(const ClassDynamics& dyn,
                                                           std::span<const NodeLetter> itinerary, const Word& q,
                                                           double stop_below = 1e-12) {
    if (q.empty()) throw ValidationError("the word q is empty");
    const RenormMatrix Aq = word_matrix(q);
    if (!is_positive(Aq)) throw ValidationError("the word q is not positive");
    std::vector<NodeLetter> qn;
    for (const auto& l : q.letters()) qn.push_back(dyn.to_node_letter(l));
    ShrinkProfile p;
    p.q_diameter = birkhoff_diameter(Aq);
    p.contraction = contraction_coefficient(p.q_diameter);
    LogScaledMatrix P(dyn.m());
    double ops = 0.0;
    auto add = [&](const NodeLetter& l) {
        std::size_t node = l.start;
        for (std::uint64_t s = 0; s < l.count; ++s) {
            P.right_multiply_elementary(l.op, dyn.k(node));
            node = dyn.next(node, l.op);
        }
        P.rescale();
        ops += static_cast<double>(l.count);
    };
    constexpr double u = std::numeric_limits<double>::epsilon() / 2;
    std::size_t i = 0;
    while (i + qn.size() <= itinerary.size()) {
        bool match = true;
        for (std::size_t j = 0; j < qn.size() && match; ++j) match = itinerary[i + j].same_letter(qn[j]);
        if (!match) {
            add(itinerary[i++]);
            continue;
        }
        for (std::size_t j = 0; j < qn.size(); ++j) add(itinerary[i++]);
        const double gamma = ops * u / (1.0 - ops * u);
        p.diameters.push_back(P.birkhoff_diameter());
        p.errors.push_back(4.0 * gamma / (1.0 - gamma) + 4.0 * u);
        if (p.diameters.back() < stop_below) break;
    }
    return p;
}

}  // namespace rauzy
