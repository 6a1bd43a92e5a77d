#pragma once

/**
 * @file zippered.hpp
 * @brief Zippered rectangles (lambda, h, a, pi), the flow P^t, the map U and
 * the first return F to the transversal.
 *
 * Boundary conventions: a_0 = h_0 = a_{m+1} = h_{m+1} = 0, pi(0) = 0 and
 * pi^{-1}(m+1) = m+1.  Vectors are 0-based, so h_i is h[i-1].
 *
 * Transversal components follow the branch rule of the induction: after an
 * a-run a_m >= 0 and the base is minus-type, after a b-run a_m <= 0 and the
 * base is plus-type.  Hence Y+ = {plus, a_m <= 0} and Y- = {minus, a_m >= 0},
 * and F swaps them.
 */

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "rauzy/bigint.hpp"
#include "rauzy/cocycle.hpp"
#include "rauzy/induction.hpp"
#include "rauzy/random.hpp"

namespace rauzy {

template <class T>
struct ZipperedRectangle {
    std::vector<T> lambda;
    std::vector<T> h;
    std::vector<T> a;
    Permutation pi;

    [[nodiscard]] std::size_t m() const noexcept { return lambda.size(); }
};

struct Violation {
    std::string constraint;
    double residual;
};

enum class AreaCheck { unit, any };

namespace detail {

template <class T>
double as_double(const T& v) {
    if constexpr (std::is_same_v<T, double>)
        return v;
    else
        return to_double(v);
}

template <class T>
PointType lambda_type(const std::vector<T>& lambda, const Permutation& pi) {
    const auto m = lambda.size();
    const auto k = static_cast<std::size_t>(pi.last_bottom());
    if (lambda[k - 1] > lambda[m - 1]) return PointType::plus;
    if (lambda[m - 1] > lambda[k - 1]) return PointType::minus;
    return PointType::boundary;
}

}  // namespace detail

template <class T>
[[nodiscard]] T area(const ZipperedRectangle<T>& x) {
    T s = 0;
    for (std::size_t i = 0; i < x.m(); ++i) s += x.lambda[i] * x.h[i];
    return s;
}

/// Every violated constraint with its residual; empty iff x is valid.
template <class T>
[[nodiscard]] std::vector<Violation> validate(const ZipperedRectangle<T>& x, double tol,
                                              AreaCheck area_check = AreaCheck::unit) {
    const auto m = x.m();
    if (x.h.size() != m || x.a.size() != m || x.pi.size() != m)
        throw ValidationError("rectangle components have inconsistent sizes");
    std::vector<Violation> out;
    const auto& pi = x.pi;
    // 1-based accessors with the boundary conventions
    auto H = [&](std::size_t i) -> T { return (i == 0 || i > m) ? T(0) : x.h[i - 1]; };
    auto A = [&](std::size_t i) -> T { return (i == 0 || i > m) ? T(0) : x.a[i - 1]; };
    auto pinv = [&](std::size_t v) -> std::size_t {
        return v == m + 1 ? m + 1 : static_cast<std::size_t>(pi.inverse(static_cast<int>(v)));
    };
    auto pimg = [&](std::size_t i) -> std::size_t {
        return i == 0 ? 0 : static_cast<std::size_t>(pi.image(static_cast<int>(i)));
    };
    auto name = [](std::string s, std::size_t i) { return s + " (i=" + std::to_string(i) + ")"; };

    for (std::size_t i = 0; i <= m; ++i) {
        const std::size_t j = pinv(pimg(i) + 1);
        const double r = detail::as_double(T((H(i) - A(i)) - (H(j) - A(j - 1))));
        if (std::abs(r) > tol)
            out.push_back({name("h_i-a_i=h_j-a_{j-1}, j=" + std::to_string(j), i), r});
    }
    auto need_le = [&](const T& lhs, const T& rhs, const std::string& what) {
        const double r = detail::as_double(T(lhs - rhs));
        if (r > tol) out.push_back({what, r});
    };
    for (std::size_t i = 1; i <= m; ++i) need_le(T(0), H(i), name("h_i>=0", i));
    for (std::size_t i = 1; i + 1 <= m; ++i) need_le(T(0), A(i), name("a_i>=0", i));
    const auto k = static_cast<std::size_t>(pi.last_bottom());
    for (std::size_t i = 1; i < m; ++i) {
        if (i == k) continue;
        need_le(A(i), H(i), name("a_i<=h_i", i));
        need_le(A(i), H(i + 1), name("a_i<=h_{i+1}", i));
    }
    need_le(A(m), H(m), "a_m<=h_m");
    need_le(-H(k), A(m), "a_m>=-h_{pi^-1 m}");
    need_le(A(k), H(k + 1), "a_{pi^-1 m}<=h_{pi^-1 m+1}");
    if (area_check == AreaCheck::unit) {
        const double r = detail::as_double(T(area(x) - T(1)));
        if (std::abs(r) > tol) out.push_back({"area=1", r});
    }
    return out;
}

/// P^t: lambda scaled by e^t, h and a by e^{-t}.
[[nodiscard]] inline ZipperedRectangle<double> flow(ZipperedRectangle<double> x, double t) {
    const double up = std::exp(t), down = std::exp(-t);
    for (double& v : x.lambda) v *= up;
    for (double& v : x.h) v *= down;
    for (double& v : x.a) v *= down;
    return x;
}

template <class T>
struct ZipStep {
    ZipperedRectangle<T> rect;
    Op op;
};

/// U: (A^{-1} lambda, A^T h, a', c pi) with c chosen by the induction's branch rule.
template <class T>
[[nodiscard]] ZipStep<T> zip_step(const ZipperedRectangle<T>& x) {
    const PointType t = detail::lambda_type(x.lambda, x.pi);
    if (t == PointType::boundary) throw NonGeneric("rectangle base lies on the boundary");
    const Op op = t == PointType::plus ? Op::a : Op::b;
    const auto m = x.m();
    const auto k = static_cast<std::size_t>(x.pi.last_bottom());
    ZipStep<T> out{x, op};
    auto& y = out.rect;
    inverse_apply_in_place(op, k, y.lambda);
    transpose_apply_in_place(op, k, y.h);
    auto A = [&](std::size_t i) -> T { return i == 0 ? T(0) : x.a[i - 1]; };
    if (op == Op::a) {
        for (std::size_t i = 1; i <= m; ++i) {
            if (i < k)
                y.a[i - 1] = A(i);
            else if (i == k)
                y.a[i - 1] = x.h[k - 1] + A(m - 1);
            else
                y.a[i - 1] = A(i - 1);
        }
    } else {
        y.a[m - 1] = -x.h[k - 1] + A(k - 1);
    }
    y.pi = apply(op, x.pi);
    return out;
}

/// Flow time from x to the next crossing of |lambda| = 1 after U:
/// -log(|lambda| - min(lambda_m, lambda_{pi^{-1}m})).
[[nodiscard]] inline double tau(const ZipperedRectangle<double>& x) {
    const auto m = x.m();
    const auto k = static_cast<std::size_t>(x.pi.last_bottom());
    double total = 0.0;
    for (double v : x.lambda) total += v;
    const double loss = std::min(x.lambda[m - 1], x.lambda[k - 1]);
    return -std::log1p(-loss / total) - std::log(total);
}

struct ElementaryReturn {
    ZipperedRectangle<double> rect;
    Op op;
    double time;
};

/// U followed by P^{tau}: back on |lambda| = 1, base advanced by one T-step.
[[nodiscard]] inline ElementaryReturn elementary_return(const ZipperedRectangle<double>& x) {
    const PointType t = detail::lambda_type(x.lambda, x.pi);
    if (t == PointType::boundary) throw NonGeneric("rectangle base lies on the boundary");
    const double time = tau(x);
    auto step = zip_step(x);
    auto& y = step.rect;
    // same arithmetic as the float induction step, so bases agree bit for bit
    double s = 0.0;
    for (double v : y.lambda) s += v;
    for (double& v : y.lambda) v /= s;
    for (double& v : y.h) v *= s;
    for (double& v : y.a) v *= s;
    return {std::move(y), step.op, time};
}

/// Repeats elementary returns until the base type flips.  The base of the
/// result is the Zorich image of the base of x and the record is its letter.
[[nodiscard]] inline std::pair<ZipperedRectangle<double>, StepRecord> first_return(const ZipperedRectangle<double>& x,
                                                                                std::uint64_t cap = default_cap) {
    const PointType type0 = detail::lambda_type(x.lambda, x.pi);
    if (type0 == PointType::boundary) throw NonGeneric("rectangle base lies on the boundary");
    StepRecord rec{type0 == PointType::plus ? Op::a : Op::b, 0, x.pi, 0.0};
    ZipperedRectangle<double> cur = x;
    for (;;) {
        if (rec.count == cap) throw CapExceeded("first return exceeded the cap of " + std::to_string(cap) + " steps");
        auto r = elementary_return(cur);
        rec.flow_time += r.time;
        ++rec.count;
        cur = std::move(r.rect);
        const PointType t = detail::lambda_type(cur.lambda, cur.pi);
        if (t == PointType::boundary) throw NonGeneric("elementary return landed on the boundary");
        if (t != type0) return {std::move(cur), std::move(rec)};
    }
}

/// The base (lambda, pi) as an induction point; lambda must already be normalized.
[[nodiscard]] inline FloatPoint base_point(const ZipperedRectangle<double>& x) {
    return FloatPoint(FloatPoint::trusted_t{}, x.lambda, x.pi);
}

/// Which transversal component x lies on, if any (a_m = 0 counts for both signs).
template <class T>
[[nodiscard]] std::optional<PointType> transversal_side(const ZipperedRectangle<T>& x) {
    const PointType t = detail::lambda_type(x.lambda, x.pi);
    const T& am = x.a.back();
    if (t == PointType::plus && am <= T(0)) return PointType::plus;
    if (t == PointType::minus && am >= T(0)) return PointType::minus;
    return std::nullopt;
}

/// Basis of the solution space of the zipper equations, as vectors (h, a) of
/// length 2m.  Exact elimination; the basis has integer-valued entries.
[[nodiscard]] inline std::vector<std::vector<double>> zipper_solution_basis(const Permutation& pi) {
    require_irreducible(pi);
    const auto m = pi.size();
    const auto n = 2 * m;
    std::vector<std::vector<Rational>> rows;
    auto pinv = [&](std::size_t v) { return v == m + 1 ? m + 1 : static_cast<std::size_t>(pi.inverse(static_cast<int>(v))); };
    auto pimg = [&](std::size_t i) { return i == 0 ? std::size_t{0} : static_cast<std::size_t>(pi.image(static_cast<int>(i))); };
    for (std::size_t i = 0; i <= m; ++i) {
        std::vector<Rational> r(n, Rational(0));
        auto addh = [&](std::size_t idx, int s) { if (idx >= 1 && idx <= m) r[idx - 1] += s; };
        auto adda = [&](std::size_t idx, int s) { if (idx >= 1 && idx <= m) r[m + idx - 1] += s; };
        const std::size_t j = pinv(pimg(i) + 1);
        addh(i, 1);
        adda(i, -1);
        addh(j, -1);
        adda(j - 1, 1);
        rows.push_back(std::move(r));
    }
    // reduced row echelon form
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < rows.size(); ++col) {
        std::size_t p = row;
        while (p < rows.size() && rows[p][col] == 0) ++p;
        if (p == rows.size()) continue;
        std::swap(rows[p], rows[row]);
        const Rational piv = rows[row][col];
        for (auto& v : rows[row]) v /= piv;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == row || rows[r][col] == 0) continue;
            const Rational f = rows[r][col];
            for (std::size_t c = 0; c < n; ++c) rows[r][c] -= f * rows[row][c];
        }
        pivots.push_back(col);
        ++row;
    }
    std::vector<std::vector<double>> basis;
    for (std::size_t free = 0; free < n; ++free) {
        if (std::find(pivots.begin(), pivots.end(), free) != pivots.end()) continue;
        std::vector<double> v(n, 0.0);
        v[free] = 1.0;
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -to_double(rows[r][free]);
        basis.push_back(std::move(v));
    }
    return basis;
}

/// A valid unit-area rectangle: (h, a) rejection-sampled from the solution
/// space of the zipper equations, lambda uniform on the simplex.
[[nodiscard]] inline ZipperedRectangle<double> random_rectangle(const Permutation& pi, Rng& rng,
                                                                std::size_t budget = 1'000'000) {
    const auto basis = zipper_solution_basis(pi);
    const auto m = pi.size();
    for (std::size_t attempt = 0; attempt < budget; ++attempt) {
        std::vector<double> z(2 * m, 0.0);
        for (const auto& b : basis) {
            const double c = rng.normal();
            for (std::size_t i = 0; i < z.size(); ++i) z[i] += c * b[i];
        }
        ZipperedRectangle<double> x;
        x.h.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(m));
        x.a.assign(z.begin() + static_cast<std::ptrdiff_t>(m), z.end());
        x.pi = pi;
        x.lambda = sample_simplex(pi, rng).lengths();
        if (std::any_of(x.h.begin(), x.h.end(), [](double v) { return !(v > 0.0); })) continue;
        if (!validate(x, 1e-12, AreaCheck::any).empty()) continue;
        const double s = area(x);
        for (double& v : x.h) v /= s;
        for (double& v : x.a) v /= s;
        if (!validate(x, 1e-12).empty()) continue;
        return x;
    }
    throw SamplingError("rejection budget exhausted while sampling a zippered rectangle");
}

}  // namespace rauzy
