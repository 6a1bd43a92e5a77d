#pragma once

/**
 * @file random.hpp
 * @brief Seeded random streams and uniform sampling of the simplex.
 *
 * Variates are built from raw 64-bit engine output rather than the
 * implementation-defined std:: distributions, so a seed reproduces the same
 * stream on every standard library.
 */

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "rauzy/point.hpp"

namespace rauzy {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : engine_(splitmix64(splitmix64(seed) ^ stream)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53; }

    double exponential() { return -std::log(uniform()); }

    double normal() {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n; }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// Uniform point of the open simplex (normalized exponentials) paired with pi.
[[nodiscard]] inline FloatPoint sample_simplex(const Permutation& pi, Rng& rng) {
    std::vector<double> v(pi.size());
    for (double& x : v) x = rng.exponential();
    return FloatPoint(std::move(v), pi);
}

}  // namespace rauzy
