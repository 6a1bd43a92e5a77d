#pragma once

/**
 * @file point.hpp
 * @brief Points (lambda, pi) of the space of interval exchanges.
 *
 * Two backends share one interface:
 *  - IetPoint<double>: lengths renormalized so that |lambda| = 1;
 *  - IetPoint<BigInt>: a primitive positive integer vector v with
 *    lambda_i = v_i / |v|.  Rauzy-Veech steps are unimodular, so v stays
 *    primitive and every quantity is exact.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <type_traits>
#include <vector>

#include "rauzy/bigint.hpp"
#include "rauzy/error.hpp"
#include "rauzy/permutation.hpp"

namespace rauzy {

enum class Backend { exact, floating };

enum class PointType { plus, minus, boundary };

[[nodiscard]] constexpr const char* to_string(PointType t) noexcept {
    switch (t) {
        case PointType::plus: return "plus";
        case PointType::minus: return "minus";
        default: return "boundary";
    }
}

template <class T>
class IetPoint {
    static_assert(std::is_same_v<T, double> || std::is_same_v<T, BigInt>, "backend is double or BigInt");

public:
    static constexpr Backend backend = std::is_same_v<T, double> ? Backend::floating : Backend::exact;

    IetPoint() = default;

    /// Any positive vector; it is normalized (floats) or reduced to a
    /// primitive vector (exact).
    IetPoint(std::vector<T> lengths, Permutation pi) : lengths_(std::move(lengths)), pi_(std::move(pi)) {
        if (lengths_.size() != pi_.size()) throw ValidationError("length vector and permutation sizes differ");
        for (const auto& l : lengths_) {
            if constexpr (std::is_same_v<T, double>) {
                if (!(l > 0.0) || !std::isfinite(l)) throw ValidationError("lengths must be positive and finite");
            } else {
                if (l <= 0) throw ValidationError("lengths must be positive");
            }
        }
        normalize();
    }

    struct trusted_t {};
    /// Skips validation; callers guarantee positivity and normalization.
    IetPoint(trusted_t, std::vector<T> lengths, Permutation pi) : lengths_(std::move(lengths)), pi_(std::move(pi)) {}

    /// Exact point from positive rationals (scaled by the common denominator).
    static IetPoint from_rationals(const std::vector<Rational>& lambda, Permutation pi)
        requires std::is_same_v<T, BigInt>
    {
        BigInt common = 1;
        for (const auto& q : lambda) common = boost::multiprecision::lcm(common, boost::multiprecision::denominator(q));
        std::vector<BigInt> v;
        v.reserve(lambda.size());
        for (const auto& q : lambda) {
            if (q <= 0) throw ValidationError("lengths must be positive");
            v.push_back(boost::multiprecision::numerator(q) * (common / boost::multiprecision::denominator(q)));
        }
        return IetPoint(std::move(v), std::move(pi));
    }

    /// The exact point whose lengths are the binary values of the doubles.
    static IetPoint from_doubles(const std::vector<double>& lambda, Permutation pi)
        requires std::is_same_v<T, BigInt>
    {
        std::vector<Rational> q;
        q.reserve(lambda.size());
        for (double d : lambda) q.emplace_back(d);
        return from_rationals(q, std::move(pi));
    }

    [[nodiscard]] std::size_t size() const noexcept { return lengths_.size(); }
    [[nodiscard]] const std::vector<T>& lengths() const noexcept { return lengths_; }
    [[nodiscard]] const Permutation& pi() const noexcept { return pi_; }

    /// lambda_{i+1} as a double (0-based index).
    [[nodiscard]] double lambda(std::size_t i) const {
        if constexpr (std::is_same_v<T, double>)
            return lengths_[i];
        else
            return ratio_to_double(lengths_[i], total());
    }

    [[nodiscard]] std::vector<double> lambdas() const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = lambda(i);
        return out;
    }

    [[nodiscard]] Rational exact_lambda(std::size_t i) const
        requires std::is_same_v<T, BigInt>
    {
        return Rational(lengths_[i], total());
    }

    /// |v| for the exact backend: the common denominator of the lambda_i.
    [[nodiscard]] BigInt total() const
        requires std::is_same_v<T, BigInt>
    {
        BigInt s = 0;
        for (const auto& l : lengths_) s += l;
        return s;
    }

    [[nodiscard]] std::size_t denominator_bits() const
        requires std::is_same_v<T, BigInt>
    {
        return boost::multiprecision::msb(total()) + 1;
    }

    bool operator==(const IetPoint&) const = default;

private:
    void normalize() {
        if constexpr (std::is_same_v<T, double>) {
            double s = 0.0;
            for (double l : lengths_) s += l;
            for (double& l : lengths_) l /= s;
        } else {
            BigInt g = 0;
            for (const auto& l : lengths_) g = boost::multiprecision::gcd(g, l);
            if (g > 1)
                for (auto& l : lengths_) l /= g;
        }
    }

    std::vector<T> lengths_;
    Permutation pi_;
};

using FloatPoint = IetPoint<double>;
using ExactPoint = IetPoint<BigInt>;

/// plus iff lambda_{pi^{-1}m} > lambda_m, minus iff the reverse, boundary on ties.
template <class T>
[[nodiscard]] PointType classify(const IetPoint<T>& x) {
    const auto m = x.size();
    const auto k = static_cast<std::size_t>(x.pi().last_bottom());
    const auto& l = x.lengths();
    if (l[k - 1] > l[m - 1]) return PointType::plus;
    if (l[m - 1] > l[k - 1]) return PointType::minus;
    return PointType::boundary;
}

/// Hilbert projective distance; +inf across different permutations.
template <class T>
[[nodiscard]] double hilbert_metric(const IetPoint<T>& x, const IetPoint<T>& y) {
    if (x.size() != y.size() || !(x.pi() == y.pi())) return std::numeric_limits<double>::infinity();
    const auto& u = x.lengths();
    const auto& v = y.lengths();
    if constexpr (std::is_same_v<T, double>) {
        double up = 0.0, down = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double r = std::log(u[i] / v[i]);
            up = std::max(up, r);
            down = std::max(down, -r);
        }
        // normalization cancels in the product of extreme ratios
        return up + down;
    } else {
        // max_i u_i/v_i and max_j v_j/u_j as exact fractions
        std::size_t imax = 0, jmax = 0;
        for (std::size_t i = 1; i < u.size(); ++i) {
            if (u[i] * v[imax] > u[imax] * v[i]) imax = i;
            if (v[i] * u[jmax] > v[jmax] * u[i]) jmax = i;
        }
        return log_ratio(u[imax] * v[jmax], v[imax] * u[jmax]);
    }
}

}  // namespace rauzy
