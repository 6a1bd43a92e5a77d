#pragma once

/**
 * @file word.hpp
 * @brief Letters (c, n, pi), compatible words, their matrices and their action
 * on permutations.
 *
 * Text form: `c:n@pi` tokens joined by `;`, e.g. `a:1@2 1;b:1@2 1`.
 */

#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rauzy/cocycle.hpp"
#include "rauzy/permutation.hpp"

namespace rauzy {

struct Letter {
    Op c = Op::a;
    std::uint64_t n = 1;
    Permutation pi;

    Letter() = default;
    Letter(Op c_, std::uint64_t n_, Permutation pi_) : c(c_), n(n_), pi(std::move(pi_)) {
        if (n == 0) throw ValidationError("letter count must be positive");
        require_irreducible(pi);
    }

    /// c^n pi
    [[nodiscard]] Permutation end() const { return apply_power(c, pi, n); }

    bool operator==(const Letter&) const = default;
    /// Ordered by (c, n, pi).
    std::strong_ordering operator<=>(const Letter& o) const {
        if (auto r = c <=> o.c; r != 0) return r;
        if (auto r = n <=> o.n; r != 0) return r;
        return pi <=> o.pi;
    }
};

/// B(w1, w2): 1 iff c1^{n1} pi1 = pi2 and c1 != c2.
[[nodiscard]] inline int letter_compat(const Letter& w1, const Letter& w2) {
    return (w1.c != w2.c && w1.pi.size() == w2.pi.size() && w1.end() == w2.pi) ? 1 : 0;
}

class Word {
public:
    Word() = default;

    /// Validates every junction.
    explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) {
        for (std::size_t i = 0; i + 1 < letters_.size(); ++i)
            if (!letter_compat(letters_[i], letters_[i + 1]))
                throw IncompatibleWord("letters " + std::to_string(i + 1) + " and " + std::to_string(i + 2) +
                                       " are not compatible");
    }

    Word(std::initializer_list<Letter> letters) : Word(std::vector<Letter>(letters)) {}

    [[nodiscard]] std::size_t size() const noexcept { return letters_.size(); }
    [[nodiscard]] bool empty() const noexcept { return letters_.empty(); }
    [[nodiscard]] const std::vector<Letter>& letters() const noexcept { return letters_; }
    [[nodiscard]] const Letter& operator[](std::size_t i) const { return letters_[i]; }
    [[nodiscard]] const Letter& front() const { return letters_.front(); }
    [[nodiscard]] const Letter& back() const { return letters_.back(); }

    /// Appends after checking the junction.
    void push_back(Letter l) {
        if (!letters_.empty() && !letter_compat(letters_.back(), l))
            throw IncompatibleWord("letter does not continue the word");
        letters_.push_back(std::move(l));
    }

    [[nodiscard]] Word prefix(std::size_t n) const {
        Word w;
        w.letters_.assign(letters_.begin(), letters_.begin() + static_cast<std::ptrdiff_t>(std::min(n, size())));
        return w;
    }

    [[nodiscard]] Word drop_front(std::size_t n) const {
        Word w;
        if (n < size()) w.letters_.assign(letters_.begin() + static_cast<std::ptrdiff_t>(n), letters_.end());
        return w;
    }

    bool operator==(const Word&) const = default;

private:
    std::vector<Letter> letters_;
};

[[nodiscard]] inline Word concat(const Word& u, const Word& v) {
    if (!u.empty() && !v.empty() && !letter_compat(u.back(), v.front()))
        throw IncompatibleWord("concatenation is not a compatible word");
    std::vector<Letter> all = u.letters();
    all.insert(all.end(), v.letters().begin(), v.letters().end());
    return Word(std::move(all));
}

/// A(c, pi) A(c, c pi) ... A(c, c^{n-1} pi)
[[nodiscard]] inline RenormMatrix letter_matrix(const Letter& w) {
    RenormMatrix M = RenormMatrix::identity(w.pi.size());
    Permutation p = w.pi;
    for (std::uint64_t i = 0; i < w.n; ++i) {
        right_multiply_elementary(M, w.c, static_cast<std::size_t>(p.last_bottom()));
        p = apply(w.c, p);
    }
    return M;
}

/// A(w1) ... A(wn); the identity of size m for the empty word.
[[nodiscard]] inline RenormMatrix word_matrix(const Word& w, std::size_t m = 0) {
    if (w.empty()) {
        if (m == 0) throw ValidationError("empty word needs an explicit dimension");
        return RenormMatrix::identity(m);
    }
    RenormMatrix M = RenormMatrix::identity(w.front().pi.size());
    for (const auto& l : w.letters()) {
        Permutation p = l.pi;
        for (std::uint64_t i = 0; i < l.n; ++i) {
            right_multiply_elementary(M, l.c, static_cast<std::size_t>(p.last_bottom()));
            p = apply(l.c, p);
        }
    }
    return M;
}

/// w pi = w_n(...(w_1 pi)); nullopt where some letter's starting permutation
/// does not match.
[[nodiscard]] inline std::optional<Permutation> word_action(const Word& w, const Permutation& pi) {
    Permutation cur = pi;
    for (const auto& l : w.letters()) {
        if (!(l.pi == cur)) return std::nullopt;
        cur = l.end();
    }
    return cur;
}

[[nodiscard]] inline std::string to_string(const Letter& l) {
    return std::string(1, op_char(l.c)) + ':' + std::to_string(l.n) + '@' + to_string(l.pi);
}

[[nodiscard]] inline std::string to_string(const Word& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += ';';
        s += to_string(w[i]);
    }
    return s;
}

[[nodiscard]] inline Letter parse_letter(std::string_view tok) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        return s;
    };
    tok = trim(tok);
    const auto colon = tok.find(':');
    const auto at = tok.find('@');
    if (colon == std::string_view::npos || at == std::string_view::npos || at < colon)
        throw ValidationError("malformed letter '" + std::string(tok) + "', expected c:n@pi");
    const Op c = parse_op(trim(tok.substr(0, colon)));
    const auto count_text = trim(tok.substr(colon + 1, at - colon - 1));
    std::uint64_t n = 0;
    auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), n);
    if (ec != std::errc{} || ptr != count_text.data() + count_text.size())
        throw ValidationError("malformed letter count '" + std::string(count_text) + "'");
    return Letter(c, n, parse_permutation(tok.substr(at + 1)));
}

[[nodiscard]] inline Word parse_word(std::string_view text) {
    std::vector<Letter> letters;
    while (!text.empty()) {
        const auto semi = text.find(';');
        const auto tok = text.substr(0, semi);
        if (tok.find_first_not_of(' ') != std::string_view::npos) letters.push_back(parse_letter(tok));
        if (semi == std::string_view::npos) break;
        text.remove_prefix(semi + 1);
    }
    return Word(std::move(letters));
}

}  // namespace rauzy
