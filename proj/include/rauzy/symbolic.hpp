#pragma once

/**
 * @file symbolic.hpp
 * @brief Coding of points by Zorich letters, cylinders, and the search for a
 * word with a positive matrix.
 */

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "rauzy/induction.hpp"
#include "rauzy/rauzy_class.hpp"

namespace rauzy {

/// w is compatible with x when x can follow w's last letter: same permutation
/// as c^n pi, and x has the type a run of c ends on (minus after a, plus
/// after b).
template <class T>
[[nodiscard]] bool is_compatible_point(const Word& w, const IetPoint<T>& x) {
    if (w.empty()) return true;
    const PointType t = classify(x);
    if (t == PointType::boundary) return false;
    const Letter& last = w.back();
    if (last.pi.size() != x.size() || !(last.end() == x.pi())) return false;
    return last.c == Op::a ? t == PointType::minus : t == PointType::plus;
}

/// The first N letters of the itinerary of x.
template <class T>
[[nodiscard]] Word encode_prefix(const IetPoint<T>& x, std::size_t n, std::uint64_t cap = default_cap) {
    Word w;
    IetPoint<T> cur = x;
    for (std::size_t s = 0; s < n; ++s) {
        try {
            auto [next, rec] = zorich_step(cur, cap);
            w.push_back(rec.letter());
            cur = std::move(next);
        } catch (NumericError& e) {
            e.set_step(s);
            throw;
        }
    }
    return w;
}

/// x belongs to the cylinder of w.  Points whose itinerary cannot be
/// continued that far are outside.
template <class T>
[[nodiscard]] bool cylinder_contains(const Word& w, const IetPoint<T>& x, std::uint64_t cap = default_cap) {
    IetPoint<T> cur = x;
    for (const auto& letter : w.letters()) {
        try {
            auto [next, rec] = zorich_step(cur, cap);
            if (!(rec.letter() == letter)) return false;
            cur = std::move(next);
        } catch (const NumericError&) {
            return false;
        }
    }
    return true;
}

struct CylinderGeometry {
    /// Normalized columns of A(w): the images of the simplex corners.
    std::vector<std::vector<Rational>> vertices;
    /// Hilbert diameter of the image simplex; +inf unless A(w) is positive.
    double diameter;
};

[[nodiscard]] inline CylinderGeometry cylinder_geometry(const Word& w, std::size_t m = 0) {
    const RenormMatrix A = word_matrix(w, m);
    const auto n = A.size();
    CylinderGeometry g;
    for (std::size_t c = 0; c < n; ++c) {
        const BigInt s = A.column_sum(c);
        std::vector<Rational> v(n);
        for (std::size_t r = 0; r < n; ++r) v[r] = Rational(A(r, c), s);
        g.vertices.push_back(std::move(v));
    }
    g.diameter = is_positive(A) ? birkhoff_diameter(A) : std::numeric_limits<double>::infinity();
    return g;
}

/// Shortest word (then lexicographically least, letters ordered by (c, n, pi))
/// with a positive matrix, letters limited to n <= max_count.
[[nodiscard]] inline Word find_positive_word(const RauzyClassGraph& graph, std::size_t max_len,
                                             std::uint64_t max_count = 3) {
    if (graph.size() == 0) throw ValidationError("empty Rauzy class");
    std::vector<Letter> firsts;
    for (Op c : {Op::a, Op::b})
        for (std::uint64_t n = 1; n <= max_count; ++n)
            for (const auto& p : graph.nodes()) firsts.emplace_back(c, n, p);
    std::sort(firsts.begin(), firsts.end());

    const auto m = static_cast<std::size_t>(graph.m());
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<Letter> stack;
        std::optional<Word> found;
        // depth-first in lexicographic order; prefix matrices carried along
        auto dfs = [&](auto&& self, const RenormMatrix& prefix) -> bool {
            if (stack.size() == len) {
                if (is_positive(prefix)) {
                    found = Word(stack);
                    return true;
                }
                return false;
            }
            std::vector<Letter> next;
            if (stack.empty())
                next = firsts;
            else
                for (std::uint64_t n = 1; n <= max_count; ++n)
                    next.emplace_back(other(stack.back().c), n, stack.back().end());
            for (auto& l : next) {
                RenormMatrix M = prefix * letter_matrix(l);
                stack.push_back(l);
                if (self(self, M)) return true;
                stack.pop_back();
            }
            return false;
        };
        if (dfs(dfs, RenormMatrix::identity(m))) return *found;
    }
    throw NotFound("no positive word of length <= " + std::to_string(max_len));
}

}  // namespace rauzy
