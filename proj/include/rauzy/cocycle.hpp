#pragma once

/**
 * @file cocycle.hpp
 * @brief Renormalization matrices A(c, pi) and their products.
 *
 * One Rauzy-Veech step replaces lengths lambda by lambda' with
 * lambda = A(c, pi) lambda'.  For c = b this is E + E_{m, pi^{-1}m}.  For
 * c = a, with k = pi^{-1}(m), the matrix has
 *
 *   row i < k      : a 1 in column i
 *   row k          : 1s in columns k and k+1
 *   row k < i < m  : a 1 in column i+1
 *   row m          : a 1 in column k+1
 *
 * which is the unique nonnegative matrix reconstructing lambda from the
 * shortened, relabelled lengths.  All entries are exact integers.
 */

#include <algorithm>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rauzy/bigint.hpp"
#include "rauzy/permutation.hpp"

namespace rauzy {

class RenormMatrix {
public:
    RenormMatrix() = default;

    explicit RenormMatrix(std::size_t m) : m_(m), entries_(m * m) {}

    [[nodiscard]] static RenormMatrix identity(std::size_t m) {
        RenormMatrix e(m);
        for (std::size_t i = 0; i < m; ++i) e(i, i) = 1;
        return e;
    }

    /// E_{ij} with 1-based (i, j), as in the usual notation.
    [[nodiscard]] static RenormMatrix unit(std::size_t m, std::size_t i, std::size_t j) {
        RenormMatrix e(m);
        e(i - 1, j - 1) = 1;
        return e;
    }

    [[nodiscard]] static RenormMatrix from_rows(const std::vector<std::vector<long long>>& rows) {
        RenormMatrix out(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size()) throw ValidationError("matrix must be square");
            for (std::size_t j = 0; j < rows.size(); ++j) out(i, j) = rows[i][j];
        }
        return out;
    }

    [[nodiscard]] std::size_t size() const noexcept { return m_; }

    /// 0-based (row, column).
    BigInt& operator()(std::size_t r, std::size_t c) { return entries_[r * m_ + c]; }
    const BigInt& operator()(std::size_t r, std::size_t c) const { return entries_[r * m_ + c]; }

    [[nodiscard]] const std::vector<BigInt>& entries() const noexcept { return entries_; }

    bool operator==(const RenormMatrix&) const = default;

    RenormMatrix& operator+=(const RenormMatrix& o) {
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
        return *this;
    }

    friend RenormMatrix operator+(RenormMatrix l, const RenormMatrix& r) { return l += r; }

    friend RenormMatrix operator*(const RenormMatrix& l, const RenormMatrix& r) {
        if (l.m_ != r.m_) throw ValidationError("matrix size mismatch");
        const auto m = l.m_;
        RenormMatrix out(m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < m; ++k) {
                const BigInt& lik = l(i, k);
                if (lik == 0) continue;
                for (std::size_t j = 0; j < m; ++j)
                    if (r(k, j) != 0) out(i, j) += lik * r(k, j);
            }
        return out;
    }

    template <class T>
    [[nodiscard]] std::vector<T> apply(const std::vector<T>& v) const {
        std::vector<T> out(m_, T(0));
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < m_; ++j)
                if ((*this)(i, j) != 0) out[i] += static_cast<T>((*this)(i, j)) * v[j];
        return out;
    }

    [[nodiscard]] std::vector<double> apply(const std::vector<double>& v) const {
        std::vector<double> out(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < m_; ++j)
                if ((*this)(i, j) != 0) out[i] += (*this)(i, j).convert_to<double>() * v[j];
        return out;
    }

    [[nodiscard]] BigInt column_sum(std::size_t c) const {
        BigInt s = 0;
        for (std::size_t r = 0; r < m_; ++r) s += (*this)(r, c);
        return s;
    }

private:
    std::size_t m_ = 0;
    std::vector<BigInt> entries_;
};

[[nodiscard]] inline RenormMatrix elementary_matrix(Op op, const Permutation& pi) {
    require_irreducible(pi);
    const auto m = pi.size();
    const auto k = static_cast<std::size_t>(pi.last_bottom());
    if (op == Op::b) return RenormMatrix::identity(m) + RenormMatrix::unit(m, m, k);
    RenormMatrix a(m);
    for (std::size_t i = 1; i <= m; ++i) {
        if (i < k)
            a(i - 1, i - 1) = 1;
        else if (i == k) {
            a(i - 1, k - 1) = 1;
            a(i - 1, k) = 1;
        } else if (i < m)
            a(i - 1, i) = 1;
        else
            a(m - 1, k) = 1;
    }
    return a;
}

/// lambda <- A(op, pi)^{-1} lambda in place, where k = pi^{-1}(m) (1-based).
/// Only subtraction and relabelling are used, so the update is exact for
/// integer types and bit-reproducible for doubles.
template <class T>
void inverse_apply_in_place(Op op, std::size_t k, std::vector<T>& lambda) {
    const auto m = lambda.size();
    if (op == Op::b) {
        lambda[m - 1] -= lambda[k - 1];
        return;
    }
    lambda[k - 1] -= lambda[m - 1];
    std::rotate(lambda.begin() + static_cast<std::ptrdiff_t>(k), lambda.begin() + static_cast<std::ptrdiff_t>(m - 1),
                lambda.end());
}

/// h <- A(op, pi)^T h in place.
template <class T>
void transpose_apply_in_place(Op op, std::size_t k, std::vector<T>& h) {
    const auto m = h.size();
    if (op == Op::b) {
        h[k - 1] += h[m - 1];
        return;
    }
    // columns: j<=k keep h_j, column k+1 collects h_k + h_m, j>k+1 takes h_{j-1}
    T last = h[m - 1];
    std::rotate(h.begin() + static_cast<std::ptrdiff_t>(k), h.begin() + static_cast<std::ptrdiff_t>(m - 1), h.end());
    h[k] = h[k - 1] + last;
}

/// M <- M * A(op, pi) via column operations, k = pi^{-1}(m) (1-based).
inline void right_multiply_elementary(RenormMatrix& M, Op op, std::size_t k) {
    const auto m = M.size();
    if (op == Op::b) {
        for (std::size_t r = 0; r < m; ++r) M(r, k - 1) += M(r, m - 1);
        return;
    }
    for (std::size_t r = 0; r < m; ++r) {
        BigInt last = std::move(M(r, m - 1));
        for (std::size_t c = m - 1; c > k; --c) M(r, c) = std::move(M(r, c - 1));
        M(r, k) = M(r, k - 1) + last;
    }
}

/// Entry sum.  For nonnegative matrices this is an algebra norm.
[[nodiscard]] inline BigInt matrix_norm(const RenormMatrix& A) {
    BigInt s = 0;
    for (const auto& e : A.entries()) s += e;
    return s;
}

[[nodiscard]] inline BigInt max_entry(const RenormMatrix& A) {
    BigInt best = 0;
    for (const auto& e : A.entries()) best = std::max(best, e);
    return best;
}

[[nodiscard]] inline bool is_positive(const RenormMatrix& A) {
    return A.size() > 0 && std::all_of(A.entries().begin(), A.entries().end(), [](const BigInt& e) { return e >= 1; });
}

[[nodiscard]] inline bool is_nonnegative(const RenormMatrix& A) {
    return std::all_of(A.entries().begin(), A.entries().end(), [](const BigInt& e) { return e >= 0; });
}

/// Fraction-free (Bareiss) elimination.
[[nodiscard]] inline BigInt determinant(const RenormMatrix& A) {
    const auto n = A.size();
    if (n == 0) return 1;
    std::vector<BigInt> a = A.entries();
    auto at = [&](std::size_t r, std::size_t c) -> BigInt& { return a[r * n + c]; };
    BigInt prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (at(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && at(p, k) == 0) ++p;
            if (p == n) return 0;
            for (std::size_t c = 0; c < n; ++c) std::swap(at(k, c), at(p, c));
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
        prev = at(k, k);
    }
    return sign * at(n - 1, n - 1);
}

/// Birkhoff's projective diameter of the image cone,
/// max over (i, j, k, l) of log(A_ik A_jl / (A_jk A_il)).  Infinite when some
/// cross-ratio has a zero denominator over a positive numerator.
[[nodiscard]] inline double birkhoff_diameter(const RenormMatrix& A) {
    const auto m = A.size();
    double best = 0.0;
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l) {
            if (k == l) continue;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    if (i == j) continue;
                    const BigInt num = A(i, k) * A(j, l);
                    const BigInt den = A(j, k) * A(i, l);
                    if (den == 0) {
                        if (num > 0) return std::numeric_limits<double>::infinity();
                        continue;
                    }
                    if (num == 0) continue;
                    if (num > den) best = std::max(best, log_ratio(num, den));
                }
        }
    return best;
}

/// Birkhoff contraction coefficient tanh(diameter / 4); 1 for infinite diameter.
[[nodiscard]] inline double contraction_coefficient(double diameter) {
    if (!std::isfinite(diameter)) return 1.0;
    return std::tanh(diameter / 4.0);
}

/// Row-major CSV of decimal integers.
inline void write_matrix_csv(std::ostream& os, const RenormMatrix& A) {
    for (std::size_t r = 0; r < A.size(); ++r) {
        for (std::size_t c = 0; c < A.size(); ++c) {
            if (c) os << ',';
            os << A(r, c).str();
        }
        os << '\n';
    }
}

}  // namespace rauzy
