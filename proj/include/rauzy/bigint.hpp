#pragma once

/**
 * @file bigint.hpp
 * @brief Arbitrary-precision integer/rational aliases and accurate logarithms.
 */

#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/multiprecision/cpp_int.hpp>

namespace rauzy {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Natural log of a positive integer of any size.
[[nodiscard]] inline double log_big(const BigInt& x) {
    const auto bits = boost::multiprecision::msb(x) + 1;
    if (bits <= 960) return std::log(x.convert_to<double>());
    const auto shift = bits - 64;
    const BigInt top = x >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::numbers::ln2;
}

/// log(num/den) for positive integers, keeping full relative precision when the
/// ratio is close to 1.
[[nodiscard]] inline double log_ratio(const BigInt& num, const BigInt& den) {
    if (num == den) return 0.0;
    const BigInt diff = num - den;
    const BigInt mag = boost::multiprecision::abs(diff);
    if (mag * 4 < den) {
        // r = diff/den carried with ~62 significant bits
        const auto shift = static_cast<long>(boost::multiprecision::msb(den)) -
                           static_cast<long>(boost::multiprecision::msb(mag)) + 62;
        const BigInt scaled = (diff << shift) / den;
        const double r = std::ldexp(scaled.convert_to<double>(), static_cast<int>(-shift));
        return std::log1p(r);
    }
    return log_big(num) - log_big(den);
}

/// Converts num/den to double without overflow in the operands.
[[nodiscard]] inline double ratio_to_double(const BigInt& num, const BigInt& den) {
    if (num == 0) return 0.0;
    const auto shift = static_cast<long>(boost::multiprecision::msb(den)) -
                       static_cast<long>(boost::multiprecision::msb(boost::multiprecision::abs(num))) + 62;
    const BigInt scaled = shift >= 0 ? BigInt((num << shift) / den) : BigInt(num / (den << -shift));
    return std::ldexp(scaled.convert_to<double>(), static_cast<int>(-shift));
}

[[nodiscard]] inline double to_double(const Rational& q) {
    return ratio_to_double(boost::multiprecision::numerator(q), boost::multiprecision::denominator(q));
}

}  // namespace rauzy
