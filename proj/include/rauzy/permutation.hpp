#pragma once

/**
 * @file permutation.hpp
 * @brief Permutations of {1..m} in one-line notation and the Rauzy moves.
 *
 * Values are 1-based labels throughout: image(j) is pi(j) and inverse(v) is
 * pi^{-1}(v), matching the usual functional notation.  Length vectors
 * elsewhere are plain 0-based containers, so lambda_i lives at index i-1.
 */

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rauzy/error.hpp"

namespace rauzy {

/// The two Rauzy operations.  Also used as the letter type c in words.
enum class Op : unsigned char { a = 0, b = 1 };

[[nodiscard]] constexpr char op_char(Op op) noexcept { return op == Op::a ? 'a' : 'b'; }

[[nodiscard]] constexpr Op other(Op op) noexcept { return op == Op::a ? Op::b : Op::a; }

[[nodiscard]] inline Op parse_op(std::string_view s) {
    if (s == "a") return Op::a;
    if (s == "b") return Op::b;
    throw ValidationError("unknown Rauzy operation '" + std::string(s) + "'");
}

class Permutation {
public:
    Permutation() = default;

    /// Validates that `images` is a bijection of {1..m} with m >= 2.
    explicit Permutation(std::vector<int> images) : images_(std::move(images)) {
        const auto m = images_.size();
        if (m < 2) throw ValidationError("permutation needs at least 2 symbols");
        inverse_.assign(m + 1, 0);
        for (std::size_t j = 0; j < m; ++j) {
            const int v = images_[j];
            if (v < 1 || static_cast<std::size_t>(v) > m || inverse_[v] != 0)
                throw ValidationError("images are not a bijection of {1.." + std::to_string(m) + "}");
            inverse_[v] = static_cast<int>(j + 1);
        }
    }

    Permutation(std::initializer_list<int> images) : Permutation(std::vector<int>(images)) {}

    [[nodiscard]] std::size_t size() const noexcept { return images_.size(); }
    [[nodiscard]] int m() const noexcept { return static_cast<int>(images_.size()); }

    /// pi(j), 1-based.
    [[nodiscard]] int image(int j) const { return images_[static_cast<std::size_t>(j - 1)]; }
    /// pi^{-1}(v), 1-based.
    [[nodiscard]] int inverse(int v) const { return inverse_[static_cast<std::size_t>(v)]; }

    /// pi^{-1}(m): the interval that comes last in the bottom row.
    [[nodiscard]] int last_bottom() const { return inverse(m()); }

    [[nodiscard]] const std::vector<int>& images() const noexcept { return images_; }

    [[nodiscard]] bool operator==(const Permutation& o) const noexcept { return images_ == o.images_; }

    /// Shortlex: shorter first, then lexicographic on images.
    [[nodiscard]] std::strong_ordering operator<=>(const Permutation& o) const noexcept {
        if (auto c = images_.size() <=> o.images_.size(); c != 0) return c;
        return images_ <=> o.images_;
    }

private:
    std::vector<int> images_;
    std::vector<int> inverse_;  // index 0 unused
};

[[nodiscard]] inline bool is_irreducible(const Permutation& pi) {
    const int m = pi.m();
    int running_max = 0;
    for (int k = 1; k < m; ++k) {
        running_max = std::max(running_max, pi.image(k));
        if (running_max == k) return false;  // pi{1..k} = {1..k}
    }
    return true;
}

inline void require_irreducible(const Permutation& pi) {
    if (pi.size() == 0) throw ValidationError("empty permutation");
    if (!is_irreducible(pi)) throw ValidationError("permutation is reducible");
}

/// a-move: the last top interval is re-inserted right after pi^{-1}(m).
[[nodiscard]] inline Permutation apply_a(const Permutation& pi) {
    require_irreducible(pi);
    const int m = pi.m();
    const int k = pi.last_bottom();
    std::vector<int> out(static_cast<std::size_t>(m));
    for (int j = 1; j <= m; ++j) {
        int v;
        if (j <= k)
            v = pi.image(j);
        else if (j == k + 1)
            v = pi.image(m);
        else
            v = pi.image(j - 1);
        out[static_cast<std::size_t>(j - 1)] = v;
    }
    return Permutation(std::move(out));
}

/// b-move: the last bottom interval is re-inserted right after pi(m).
[[nodiscard]] inline Permutation apply_b(const Permutation& pi) {
    require_irreducible(pi);
    const int m = pi.m();
    const int pm = pi.image(m);
    std::vector<int> out(static_cast<std::size_t>(m));
    for (int j = 1; j <= m; ++j) {
        const int v = pi.image(j);
        int w;
        if (v <= pm)
            w = v;
        else if (v < m)
            w = v + 1;
        else
            w = pm + 1;
        out[static_cast<std::size_t>(j - 1)] = w;
    }
    return Permutation(std::move(out));
}

[[nodiscard]] inline Permutation apply(Op op, const Permutation& pi) {
    return op == Op::a ? apply_a(pi) : apply_b(pi);
}

[[nodiscard]] inline Permutation apply_power(Op op, const Permutation& pi, std::uint64_t n) {
    Permutation out = pi;
    for (std::uint64_t i = 0; i < n; ++i) out = apply(op, out);
    return out;
}

/// "3 2 1"
[[nodiscard]] inline std::string to_string(const Permutation& pi) {
    std::string s;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(pi.images()[i]);
    }
    return s;
}

/// Parses whitespace-separated images; commas are accepted as separators too.
[[nodiscard]] inline Permutation parse_permutation(std::string_view text) {
    std::vector<int> images;
    std::size_t i = 0;
    while (i < text.size()) {
        const char ch = text[i];
        if (ch == ' ' || ch == ',' || ch == '\t') {
            ++i;
            continue;
        }
        int v = 0;
        auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), v);
        if (ec != std::errc{} || ptr == text.data() + i)
            throw ValidationError("cannot parse permutation '" + std::string(text) + "'");
        images.push_back(v);
        i = static_cast<std::size_t>(ptr - text.data());
    }
    return Permutation(std::move(images));
}

}  // namespace rauzy
