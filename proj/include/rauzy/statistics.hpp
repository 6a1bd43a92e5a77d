#pragma once

/**
 * @file statistics.hpp
 * @brief Estimators: batch means, lagged correlations, exponential and
 * survival fits, running extremes with plateau flags, exponential moments and
 * Hölder-constant lower bounds.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "rauzy/bigint.hpp"
#include "rauzy/cocycle.hpp"
#include "rauzy/error.hpp"
#include "rauzy/induction.hpp"
#include "rauzy/observable.hpp"
#include "rauzy/random.hpp"

namespace rauzy {

struct MeanEstimate {
    double mean = 0.0;
    double stderr = 0.0;
    std::size_t samples = 0;
};

namespace detail {

/// Standard error of a mean from floor(sqrt(N)) consecutive batches.
inline double batch_stderr(const std::vector<double>& sums, const std::vector<std::size_t>& counts) {
    // sums and counts are per block; consecutive blocks are grouped into ~sqrt(N) batches
    std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (n < 4 || sums.size() < 2) return 0.0;
    const auto target = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    const std::size_t per = std::max<std::size_t>(1, (sums.size() + target / 2) / std::max<std::size_t>(1, target));
    std::vector<double> means;
    std::vector<double> weights;
    for (std::size_t b = 0; b < sums.size(); b += per) {
        double s = 0.0;
        std::size_t c = 0;
        for (std::size_t i = b; i < std::min(sums.size(), b + per); ++i) {
            s += sums[i];
            c += counts[i];
        }
        if (c == 0) continue;
        means.push_back(s / static_cast<double>(c));
        weights.push_back(static_cast<double>(c));
    }
    const auto B = means.size();
    if (B < 2) return 0.0;
    const double total_w = std::accumulate(weights.begin(), weights.end(), 0.0);
    double mu = 0.0;
    for (std::size_t i = 0; i < B; ++i) mu += weights[i] * means[i];
    mu /= total_w;
    double var = 0.0;
    for (std::size_t i = 0; i < B; ++i) var += weights[i] * (means[i] - mu) * (means[i] - mu);
    var = var / total_w * static_cast<double>(B) / static_cast<double>(B - 1);
    return std::sqrt(var / static_cast<double>(B));
}

}  // namespace detail

/// Mean with a batch-means standard error.
[[nodiscard]] inline MeanEstimate batch_mean(const std::vector<double>& xs) {
    if (xs.empty()) throw InsufficientData("no samples");
    const double shift = xs.front();
    std::vector<double> sums(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sums[i] = xs[i] - shift;
    const std::vector<std::size_t> counts(xs.size(), 1);
    const double centered = std::accumulate(sums.begin(), sums.end(), 0.0) / static_cast<double>(xs.size());
    return {shift + centered, detail::batch_stderr(sums, counts), xs.size()};
}

/// Average of phi over the plus-type points after the first burn_in entries.
[[nodiscard]] inline MeanEstimate birkhoff_mean(const Orbit<double>& orbit, const ObservableSpec& phi,
                                               std::size_t burn_in) {
    if (burn_in >= orbit.entries.size()) throw InsufficientData("burn-in leaves no orbit points");
    std::vector<double> xs;
    for (std::size_t i = burn_in; i < orbit.entries.size(); ++i) {
        const auto& x = orbit.entries[i].start;
        if (classify(x) == PointType::plus) xs.push_back(phi(x));
    }
    if (xs.empty()) throw InsufficientData("no plus-type points after burn-in");
    return batch_mean(xs);
}

struct CorrelationPoint {
    std::size_t n = 0;
    double corr = 0.0;
    double stderr = 0.0;
    std::size_t samples = 0;
};

/// Streaming estimator of cov(phi(y_j), psi(y_{j+n})) for n = 0..n_max over
/// sequences y split into segments; pairs never straddle segments.  Sums are
/// kept per block of `block_size` pairs, so memory does not grow with the
/// series, and centering by the global means is applied algebraically at the
/// end.
class CorrelationAccumulator {
public:
    explicit CorrelationAccumulator(std::size_t n_max, std::size_t block_size = 1)
        : n_max_(n_max), block_size_(std::max<std::size_t>(1, block_size)), lags_(n_max + 1) {}

    /// Starts a new independent segment.
    void begin_segment() { recent_.clear(); }

    void push(double phi, double psi) {
        if (!has_shift_) {
            shift_phi_ = phi;
            shift_psi_ = psi;
            has_shift_ = true;
        }
        phi -= shift_phi_;
        psi -= shift_psi_;
        recent_.push_front(phi);
        if (recent_.size() > n_max_ + 1) recent_.pop_back();
        for (std::size_t n = 0; n < recent_.size(); ++n) add(lags_[n], recent_[n], psi);
    }

    /// Appends another accumulator's blocks after this one's.
    void merge(const CorrelationAccumulator& o) {
        if (o.n_max_ != n_max_) throw ValidationError("merging correlation accumulators with different n_max");
        if (!o.has_shift_) return;
        if (!has_shift_) {
            shift_phi_ = o.shift_phi_;
            shift_psi_ = o.shift_psi_;
            has_shift_ = true;
        }
        const double d = o.shift_phi_ - shift_phi_, e = o.shift_psi_ - shift_psi_;
        for (std::size_t n = 0; n <= n_max_; ++n) {
            for (Block b : o.lags_[n]) {
                const double c = static_cast<double>(b.count);
                b.s_pp += e * b.s_phi + d * b.s_psi + c * d * e;
                b.s_phi += c * d;
                b.s_psi += c * e;
                lags_[n].push_back(b);
            }
        }
    }

    /// Number of points pushed (pairs at lag 0).
    [[nodiscard]] std::size_t points() const {
        std::size_t c = 0;
        for (const auto& b : lags_[0]) c += b.count;
        return c;
    }

    [[nodiscard]] std::vector<CorrelationPoint> series() const {
        const std::size_t total = points();
        if (total == 0) throw InsufficientData("no points for the correlation series");
        double sp = 0.0, ss = 0.0;
        for (const auto& b : lags_[0]) {
            sp += b.s_phi;
            ss += b.s_psi;
        }
        const double mphi = sp / static_cast<double>(total), mpsi = ss / static_cast<double>(total);
        std::vector<CorrelationPoint> out;
        for (std::size_t n = 0; n <= n_max_; ++n) {
            std::vector<double> zs;
            std::vector<std::size_t> counts;
            double zsum = 0.0;
            std::size_t pairs = 0;
            for (const auto& b : lags_[n]) {
                const double c = static_cast<double>(b.count);
                const double z = b.s_pp - mpsi * b.s_phi - mphi * b.s_psi + c * mphi * mpsi;
                zs.push_back(z);
                counts.push_back(b.count);
                zsum += z;
                pairs += b.count;
            }
            if (pairs == 0) throw InsufficientData("no pairs at lag " + std::to_string(n));
            out.push_back({n, zsum / static_cast<double>(pairs), detail::batch_stderr(zs, counts), pairs});
        }
        return out;
    }

private:
    struct Block {
        double s_phi = 0.0, s_psi = 0.0, s_pp = 0.0;
        std::size_t count = 0;
    };

    void add(std::vector<Block>& blocks, double phi, double psi) {
        if (blocks.empty() || blocks.back().count == block_size_) blocks.emplace_back();
        Block& b = blocks.back();
        b.s_phi += phi;
        b.s_psi += psi;
        b.s_pp += phi * psi;
        ++b.count;
    }

    std::size_t n_max_;
    std::size_t block_size_;
    bool has_shift_ = false;
    double shift_phi_ = 0.0, shift_psi_ = 0.0;
    std::deque<double> recent_;
    std::vector<std::vector<Block>> lags_;
};

/// Lag-n covariances of phi and psi along the plus-type points of an orbit,
/// lag measured in G^2 steps.
[[nodiscard]] inline std::vector<CorrelationPoint> correlation_series(const Orbit<double>& orbit,
                                                                      const ObservableSpec& phi,
                                                                      const ObservableSpec& psi, std::size_t n_max,
                                                                      std::size_t burn_in) {
    const std::size_t len = orbit.entries.size();
    if (burn_in >= len || (len - burn_in) / 2 <= 10 * n_max)
        throw InsufficientData("orbit too short: need (length - burn_in)/2 > 10 n_max");
    CorrelationAccumulator acc(n_max);
    for (std::size_t i = burn_in; i < len; ++i) {
        const auto& x = orbit.entries[i].start;
        if (classify(x) == PointType::plus) acc.push(phi(x), psi(x));
    }
    return acc.series();
}

namespace detail {

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
};

inline LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
        syy += w[i] * (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        sse += w[i] * r * r;
    }
    f.r_squared = syy > 0 ? 1.0 - sse / syy : 1.0;
    return f;
}

inline LineFit line(const std::vector<double>& x, const std::vector<double>& y) {
    return weighted_line(x, y, std::vector<double>(x.size(), 1.0));
}

/// Coefficient of t^2 in the least-squares quadratic through (x, y).
inline double quadratic_coefficient(const std::vector<double>& x, const std::vector<double>& y) {
    // normal equations for (1, x, x^2), solved by Gaussian elimination
    double M[3][4] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double p[3] = {1.0, x[i], x[i] * x[i]};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) M[r][c] += p[r] * p[c];
            M[r][3] += p[r] * y[i];
        }
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
        std::swap(M[c], M[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = M[r][c] / M[c][c];
            for (int k = c; k < 4; ++k) M[r][k] -= f * M[c][k];
        }
    }
    return M[2][3] / M[2][2];
}

inline double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(v.size() - 1, lo + 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

struct ExponentialFit {
    /// Decay rate: c_n ~ C exp(-delta n).
    double delta = 0.0;
    double log_c = 0.0;
    /// 95% parametric-bootstrap interval for delta.
    double ci_low = 0.0;
    double ci_high = 0.0;
    double r_squared = 0.0;
    /// Quadratic coefficient of log|c_n| times the squared window span.
    double curvature = 0.0;
    bool convex = false;
    /// Set when the log-linear model is doubtful (convex or R^2 < 0.98).
    bool flagged = false;
    std::size_t first_lag = 0;
    std::size_t last_lag = 0;
};

/// Least squares on log|c_n| over the leading run of lags with
/// |c_n| > floor_mult * stderr, plus a parametric bootstrap interval.
[[nodiscard]] inline ExponentialFit fit_exponential(const std::vector<CorrelationPoint>& series,
                                                    double floor_mult = 3.0, std::size_t resamples = 2000,
                                                    std::uint64_t seed = 0x5eedULL) {
    std::vector<double> x, y, se, c;
    for (const auto& p : series) {
        if (!(std::abs(p.corr) > floor_mult * p.stderr) || p.corr == 0.0) break;
        x.push_back(static_cast<double>(p.n));
        y.push_back(std::log(std::abs(p.corr)));
        se.push_back(p.stderr);
        c.push_back(p.corr);
    }
    if (x.size() < 4)
        throw InsufficientData("fit window has " + std::to_string(x.size()) + " lags above the noise floor; 4 needed");
    ExponentialFit f;
    const auto lf = detail::line(x, y);
    f.delta = -lf.slope;
    f.log_c = lf.intercept;
    f.r_squared = lf.r_squared;
    f.first_lag = static_cast<std::size_t>(x.front());
    f.last_lag = static_cast<std::size_t>(x.back());
    const double span = x.back() - x.front();
    f.curvature = detail::quadratic_coefficient(x, y) * span * span;
    f.convex = f.curvature > 0.1;
    f.flagged = f.convex || f.r_squared < 0.98;

    Rng rng(seed);
    std::vector<double> deltas;
    deltas.reserve(resamples);
    std::vector<double> ys(y.size());
    for (std::size_t b = 0; b < resamples; ++b) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double cs = std::abs(c[i] + se[i] * rng.normal());
            ys[i] = std::log(std::max(cs, std::numeric_limits<double>::min()));
        }
        deltas.push_back(-detail::line(x, ys).slope);
    }
    f.ci_low = resamples ? detail::quantile(deltas, 0.025) : f.delta;
    f.ci_high = resamples ? detail::quantile(deltas, 0.975) : f.delta;
    return f;
}

struct SurvivalPoint {
    std::size_t N = 0;
    std::size_t survivors = 0;
    std::size_t total = 0;

    [[nodiscard]] double fraction() const { return static_cast<double>(survivors) / static_cast<double>(total); }
};

/// S(N) = #{n_q > N} for N = 0..n_max.
[[nodiscard]] inline std::vector<SurvivalPoint> survival_table(const std::vector<std::uint64_t>& n_q,
                                                               std::size_t n_max) {
    std::vector<std::size_t> hist(n_max + 2, 0);
    for (auto n : n_q) ++hist[std::min<std::uint64_t>(n, n_max + 1)];
    std::vector<SurvivalPoint> out;
    std::size_t at_most = 0;
    for (std::size_t N = 0; N <= n_max; ++N) {
        at_most += hist[N];
        out.push_back({N, n_q.size() - at_most, n_q.size()});
    }
    return out;
}

struct TailFit {
    /// Fitted ratio: S(N) ~ C theta^N.
    double theta = 0.0;
    double log_c = 0.0;
    double r_squared = 0.0;
    /// Last N in the fit window.
    std::size_t window_end = 0;
    std::size_t total = 0;
};

/// Log-linear fit of the survival function over the N with at least
/// min_survivors survivors, weighted by the survivor count.
[[nodiscard]] inline TailFit tail_fit(const std::vector<std::uint64_t>& n_q, std::size_t n_max,
                                      std::size_t min_survivors = 30) {
    if (n_q.empty()) throw InsufficientData("no return records");
    std::vector<double> x, y, w;
    for (const auto& p : survival_table(n_q, n_max)) {
        if (p.survivors < min_survivors) break;
        x.push_back(static_cast<double>(p.N));
        y.push_back(std::log(p.fraction()));
        w.push_back(static_cast<double>(p.survivors));
    }
    if (x.size() < 3) throw InsufficientData("survival window has fewer than 3 points");
    const auto lf = detail::weighted_line(x, y, w);
    return {std::exp(lf.slope), lf.intercept, lf.r_squared, static_cast<std::size_t>(x.back()), n_q.size()};
}

/// Running maximum (or minimum) with a plateau flag: the last doubling of the
/// sample raised the extreme by less than 5%.
struct PlateauSummary {
    double value = 0.0;
    /// The extreme over the first half of the samples.
    double half_value = 0.0;
    std::size_t samples = 0;
    /// Relative change over the last doubling.
    double gain = 0.0;
    bool plateau = false;
    /// (sample count, running extreme) at powers of two and at the end.
    std::vector<std::pair<std::size_t, double>> checkpoints;
};

[[nodiscard]] inline PlateauSummary running_extreme(const std::vector<double>& xs, bool maximum = true) {
    PlateauSummary s;
    s.samples = xs.size();
    if (xs.empty()) return s;
    auto better = [&](double a, double b) { return maximum ? a > b : a < b; };
    double cur = xs.front();
    std::size_t next_mark = 1;
    const std::size_t half = xs.size() / 2;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (better(xs[i], cur)) cur = xs[i];
        if (i + 1 == half) s.half_value = cur;
        if (i + 1 == next_mark || i + 1 == xs.size()) {
            s.checkpoints.emplace_back(i + 1, cur);
            if (i + 1 == next_mark) next_mark *= 2;
        }
    }
    s.value = cur;
    if (half == 0) return s;
    const double denom = std::abs(s.half_value);
    s.gain = denom > 0 ? std::abs(s.value - s.half_value) / denom : (s.value == s.half_value ? 0.0 : 1.0);
    s.plateau = s.gain < 0.05;
    return s;
}

struct MomentDiagnostic {
    /// Sample mean of exp(eps x).
    double estimate = 0.0;
    /// Same over the first quarter and first half of the sample.
    double quarter = 0.0;
    double half = 0.0;
    /// Exponential tail rate of x from its top order statistics.
    double tail_rate = 0.0;
    /// eps below the tail rate and both doublings moved the estimate by < 10%.
    bool stable = false;
};

[[nodiscard]] inline MomentDiagnostic exp_moment(const std::vector<double>& xs, double eps) {
    if (xs.empty()) throw InsufficientData("no samples for the exponential moment");
    if (eps < 0) throw ValidationError("epsilon must be nonnegative");
    auto mean_exp = [&](std::size_t n) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::exp(eps * xs[i]);
        return s / static_cast<double>(n);
    };
    MomentDiagnostic d;
    d.estimate = mean_exp(xs.size());
    d.half = mean_exp(std::max<std::size_t>(1, xs.size() / 2));
    d.quarter = mean_exp(std::max<std::size_t>(1, xs.size() / 4));
    std::vector<double> sorted(xs);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const std::size_t k =
        std::min(sorted.size() - 1, std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(sorted.size()))));
    double excess = 0.0;
    for (std::size_t i = 0; i < k; ++i) excess += sorted[i] - sorted[k];
    d.tail_rate = (k > 0 && excess > 0) ? static_cast<double>(k) / excess : std::numeric_limits<double>::infinity();
    auto close = [](double a, double b) { return std::abs(a - b) <= 0.1 * std::abs(b); };
    d.stable = eps < d.tail_rate && close(d.half, d.quarter) && close(d.estimate, d.half);
    return d;
}

struct HolderEstimate {
    double sup = 0.0;
    /// Largest observed |phi(x) - phi(y)| / d(x, y)^alpha.
    PlateauSummary seminorm;
    /// sup + seminorm: a lower bound for the Hölder norm.
    double lower_bound = 0.0;
    /// The seminorm kept growing with the sample: no evidence of Hölder continuity.
    bool non_holder = false;
};

[[nodiscard]] inline HolderEstimate holder_norm_estimate(const ObservableSpec& phi, double alpha,
                                                         const std::vector<std::pair<FloatPoint, FloatPoint>>& pairs) {
    HolderEstimate h;
    std::vector<double> ratios;
    for (const auto& [x, y] : pairs) {
        const double fx = phi(x), fy = phi(y);
        h.sup = std::max({h.sup, std::abs(fx), std::abs(fy)});
        const double d = hilbert_metric(x, y);
        if (!(d > 0) || !std::isfinite(d)) continue;
        ratios.push_back(std::abs(fx - fy) / std::pow(d, alpha));
    }
    h.seminorm = running_extreme(ratios, true);
    h.lower_bound = h.sup + h.seminorm.value;
    h.non_holder = !h.seminorm.plateau;
    return h;
}

struct RatioBounds {
    /// Running max over points of max_{i,j} lambda_i / lambda_j.
    PlateauSummary max_length_ratio;
    /// Running min over matrices of min over points of |A lambda| / matrix_norm(A).
    PlateauSummary min_norm_ratio;
};

[[nodiscard]] inline RatioBounds ratio_bound_check(const std::vector<FloatPoint>& points,
                                                   const std::vector<RenormMatrix>& matrices) {
    if (points.empty()) throw InsufficientData("no points for the ratio check");
    std::vector<double> ratios;
    ratios.reserve(points.size());
    for (const auto& x : points) {
        const auto [lo, hi] = std::minmax_element(x.lengths().begin(), x.lengths().end());
        ratios.push_back(*hi / *lo);
    }
    std::vector<double> norm_ratios;
    for (const auto& A : matrices) {
        if (!is_nonnegative(A) || A.size() != points.front().size())
            throw ValidationError("test matrices must be nonnegative and match the point dimension");
        const BigInt norm = matrix_norm(A);
        if (norm == 0) throw ValidationError("zero test matrix");
        std::vector<double> weights(A.size());
        for (std::size_t c = 0; c < A.size(); ++c) weights[c] = ratio_to_double(A.column_sum(c), norm);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& x : points) {
            const double total = std::accumulate(x.lengths().begin(), x.lengths().end(), 0.0);
            double s = 0.0;
            for (std::size_t c = 0; c < A.size(); ++c) s += weights[c] * x.lengths()[c];
            best = std::min(best, s / total);
        }
        norm_ratios.push_back(best);
    }
    return {running_extreme(ratios, true), running_extreme(norm_ratios, false)};
}

/// Pairs (x, y) with x uniform and y a multiplicative perturbation of x at a
/// log-uniform scale in [1e-8, 1], same permutation.
[[nodiscard]] inline std::vector<std::pair<FloatPoint, FloatPoint>> sample_holder_pairs(const Permutation& pi,
                                                                                      std::size_t count, Rng& rng) {
    std::vector<std::pair<FloatPoint, FloatPoint>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        FloatPoint x = sample_simplex(pi, rng);
        const double scale = std::pow(10.0, -8.0 * rng.uniform());
        std::vector<double> v = x.lengths();
        for (double& l : v) l *= std::exp(scale * rng.normal());
        out.emplace_back(std::move(x), FloatPoint(std::move(v), pi));
    }
    return out;
}

}  // namespace rauzy
