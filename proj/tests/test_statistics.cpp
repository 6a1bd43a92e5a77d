#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "rauzy/experiments.hpp"
#include "rauzy/statistics.hpp"

using namespace rauzy;

namespace {

const Permutation P2({2, 1});

/// AR(1) series x_{t+1} = rho x_t + e_t with unit innovations, started stationary.
std::vector<double> ar1(double rho, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    x[0] = rng.normal() / std::sqrt(1 - rho * rho);
    for (std::size_t i = 1; i < n; ++i) x[i] = rho * x[i - 1] + rng.normal();
    return x;
}

/// Direct covariance of (xs[j], ys[j+n]) centered at the full-sample means.
double brute_cov(const std::vector<double>& xs, const std::vector<double>& ys, std::size_t n) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double s = 0;
    for (std::size_t j = 0; j + n < xs.size(); ++j) s += (xs[j] - mx) * (ys[j + n] - my);
    return s / static_cast<double>(xs.size() - n);
}

std::vector<CorrelationPoint> synthetic(const std::function<double(double)>& c, std::size_t n_max, double rel_err) {
    std::vector<CorrelationPoint> out;
    for (std::size_t n = 0; n <= n_max; ++n) {
        const double v = c(static_cast<double>(n));
        out.push_back({n, v, std::abs(v) * rel_err, 1000});
    }
    return out;
}

}  // namespace

TEST(SampleSimplex, SumsToOneAndHasUniformMean) {
    Rng rng(11);
    const std::size_t N = 100000;
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const auto x = sample_simplex(P2, rng);
        EXPECT_NEAR(x.lengths()[0] + x.lengths()[1], 1.0, 1e-14);
        s += x.lengths()[0];
        s2 += x.lengths()[0] * x.lengths()[0];
    }
    // lambda_1 is uniform on (0, 1): mean 1/2, variance 1/12
    EXPECT_NEAR(s / N, 0.5, 3 * std::sqrt(1.0 / 12 / N));
    EXPECT_NEAR(s2 / N - (s / N) * (s / N), 1.0 / 12, 0.002);

    Rng a(5, 3), b(5, 3);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_simplex(P2, a).lengths(), sample_simplex(P2, b).lengths());
}

TEST(BatchMean, ConstantAndIndependentData) {
    const auto c = batch_mean(std::vector<double>(1000, 0.1));
    EXPECT_EQ(c.mean, 0.1);
    EXPECT_EQ(c.stderr, 0.0);

    Rng rng(1);
    std::vector<double> xs(40000);
    for (double& x : xs) x = rng.normal();
    const auto m = batch_mean(xs);
    EXPECT_NEAR(m.stderr, 1.0 / std::sqrt(40000.0), 0.25 / std::sqrt(40000.0));
    EXPECT_NEAR(m.mean, 0.0, 4 * m.stderr);
    EXPECT_THROW((void)batch_mean({}), InsufficientData);
}

TEST(BatchMean, CorrelatedDataUsesTheLongRunVariance) {
    // long-run variance of AR(1) with unit innovations: 1 / (1 - rho)^2
    const double rho = 0.8;
    const auto xs = ar1(rho, 400000, 2);
    const auto m = batch_mean(xs);
    const double theory = std::sqrt(1.0 / ((1 - rho) * (1 - rho)) / static_cast<double>(xs.size()));
    EXPECT_GT(m.stderr, 0.75 * theory);
    EXPECT_LT(m.stderr, 1.25 * theory);
}

TEST(BirkhoffMean, ConstantBurnInAndSelfConsistency) {
    Rng rng(3);
    const auto orb = orbit(sample_simplex(P2, rng), 2000);
    ObservableSpec one = ObservableSpec::user_table({{P2, 1.0}});
    EXPECT_EQ(birkhoff_mean(orb, one, 10).mean, 1.0);
    EXPECT_THROW((void)birkhoff_mean(orb, one, 2000), InsufficientData);

    // two independent orbits estimate the same invariant mean
    const auto phi = ObservableSpec::coordinate(0);
    Rng r1(10), r2(20);
    const auto a = birkhoff_mean(orbit(sample_simplex(P2, r1), 200000), phi, 1000);
    const auto b = birkhoff_mean(orbit(sample_simplex(P2, r2), 200000), phi, 1000);
    EXPECT_LT(std::abs(a.mean - b.mean), 3 * std::hypot(a.stderr, b.stderr));
    // lambda_1 exceeds lambda_2 on plus-type points of (2 1)
    EXPECT_GT(a.mean, 0.5);
}

TEST(CorrelationAccumulator, MatchesDirectComputation) {
    const auto xs = ar1(0.6, 5000, 4);
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = xs[i] * xs[i];
    for (std::size_t block : {1u, 7u, 64u}) {
        CorrelationAccumulator acc(5, block);
        for (std::size_t i = 0; i < xs.size(); ++i) acc.push(xs[i], ys[i]);
        const auto s = acc.series();
        ASSERT_EQ(s.size(), 6u);
        for (std::size_t n = 0; n <= 5; ++n) {
            EXPECT_NEAR(s[n].corr, brute_cov(xs, ys, n), 1e-12) << "block " << block << " lag " << n;
            EXPECT_EQ(s[n].samples, xs.size() - n);
            EXPECT_GE(s[n].stderr, 0.0);
        }
    }
}

TEST(CorrelationAccumulator, SegmentsAndMergeDoNotMixPairs) {
    const auto xs = ar1(0.5, 3000, 5);
    CorrelationAccumulator whole(3), first(3), second(3);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i == 1000) whole.begin_segment();
        whole.push(xs[i], xs[i]);
        (i < 1000 ? first : second).push(xs[i], xs[i]);
    }
    first.merge(second);
    const auto a = whole.series(), b = first.series();
    for (std::size_t n = 0; n <= 3; ++n) {
        EXPECT_NEAR(a[n].corr, b[n].corr, 1e-13);
        EXPECT_EQ(a[n].samples, xs.size() - 2 * n);
        EXPECT_EQ(a[n].samples, b[n].samples);
    }
}

TEST(CorrelationAccumulator, ConstantObservableGivesZero) {
    CorrelationAccumulator acc(4);
    for (int i = 0; i < 500; ++i) acc.push(0.3, 0.3);
    for (const auto& p : acc.series()) {
        EXPECT_EQ(p.corr, 0.0);
        EXPECT_EQ(p.stderr, 0.0);
    }
}

TEST(CorrelationAccumulator, RecoversAutoregressiveCovariances) {
    // AR(1): c_n = rho^n / (1 - rho^2)
    const double rho = 0.5;
    const auto xs = ar1(rho, 1000000, 6);
    CorrelationAccumulator acc(6, 32);
    for (double x : xs) acc.push(x, x);
    for (const auto& p : acc.series()) {
        const double theory = std::pow(rho, static_cast<double>(p.n)) / (1 - rho * rho);
        EXPECT_NEAR(p.corr, theory, 4.5 * p.stderr) << "lag " << p.n;
    }
}

TEST(CorrelationSeries, LagZeroIsTheVarianceOfPlusPoints) {
    Rng rng(7);
    const auto orb = orbit(sample_simplex(Permutation({3, 2, 1}), rng), 20000);
    const auto phi = ObservableSpec::coordinate(0);
    const auto s = correlation_series(orb, phi, phi, 5, 100);
    std::vector<double> v;
    for (std::size_t i = 100; i < orb.entries.size(); ++i)
        if (classify(orb.entries[i].start) == PointType::plus) v.push_back(phi(orb.entries[i].start));
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    EXPECT_NEAR(s[0].corr, var / static_cast<double>(v.size()), 1e-14);
    EXPECT_GE(s[0].corr, 0.0);
    EXPECT_EQ(s[0].samples, v.size());
    EXPECT_THROW((void)correlation_series(orb, phi, phi, 1000, 100), InsufficientData);
}

TEST(FitExponential, ExactExponential) {
    const auto f = fit_exponential(synthetic([](double n) { return 2 * std::exp(-0.5 * n); }, 20, 1e-6));
    EXPECT_NEAR(f.delta, 0.5, 1e-6);
    EXPECT_NEAR(std::exp(f.log_c), 2.0, 1e-6);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_LT(f.ci_low, f.delta);
    EXPECT_GT(f.ci_high, f.delta);
    EXPECT_GT(f.ci_low, 0.0);
    EXPECT_FALSE(f.flagged);
    EXPECT_EQ(f.first_lag, 0u);
    EXPECT_EQ(f.last_lag, 20u);
}

TEST(FitExponential, WhiteNoiseHasNoSignal) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        std::vector<CorrelationPoint> s;
        for (std::size_t n = 0; n <= 20; ++n) s.push_back({n, 0.01 * rng.normal(), 0.01, 10000});
        try {
            const auto f = fit_exponential(s);
            EXPECT_LE(f.ci_low, 0.0);
            EXPECT_GE(f.ci_high, 0.0);
        } catch (const InsufficientData&) {
            SUCCEED();
        }
    }
}

TEST(FitExponential, StretchedExponentialIsFlagged) {
    const auto f = fit_exponential(synthetic([](double n) { return std::exp(-std::sqrt(n)); }, 20, 1e-6));
    EXPECT_TRUE(f.convex);
    EXPECT_TRUE(f.flagged);
    EXPECT_GT(f.curvature, 0.1);
}

TEST(FitExponential, WindowStopsAtTheNoiseFloor) {
    std::vector<CorrelationPoint> s;
    for (std::size_t n = 0; n <= 10; ++n) s.push_back({n, std::exp(-1.0 * n), 1e-3, 1000});
    // exp(-n) > 3e-3 for n <= 5
    const auto f = fit_exponential(s, 3.0);
    EXPECT_EQ(f.last_lag, 5u);
    EXPECT_THROW((void)fit_exponential(s, 100.0), InsufficientData);
}

TEST(FitExponential, AutoregressiveDecayRate) {
    const auto xs = ar1(0.5, 1000000, 8);
    CorrelationAccumulator acc(10, 32);
    for (double x : xs) acc.push(x, x);
    const auto f = fit_exponential(acc.series());
    EXPECT_NEAR(f.delta, std::log(2.0), 0.1);
    EXPECT_GT(f.ci_low, 0.0);
}

TEST(Survival, TableAndGeometricTail) {
    const std::vector<std::uint64_t> small{1, 1, 2, 5};
    const auto t = survival_table(small, 5);
    EXPECT_EQ(t[0].survivors, 4u);
    EXPECT_EQ(t[0].fraction(), 1.0);
    EXPECT_EQ(t[1].survivors, 2u);
    EXPECT_EQ(t[2].survivors, 1u);
    EXPECT_EQ(t[5].survivors, 0u);

    // P(n > N) = 0.7^N
    Rng rng(9);
    std::vector<std::uint64_t> ns(100000);
    for (auto& n : ns) n = 1 + static_cast<std::uint64_t>(std::floor(std::log(rng.uniform()) / std::log(0.7)));
    const auto f = tail_fit(ns, 60);
    EXPECT_NEAR(f.theta, 0.7, 0.02);
    EXPECT_GT(f.r_squared, 0.99);
    EXPECT_NEAR(f.log_c, 0.0, 0.05);
    EXPECT_GE(survival_table(ns, 60)[f.window_end].survivors, 30u);
    EXPECT_THROW((void)tail_fit({}, 10), InsufficientData);
}

TEST(RunningExtreme, PlateauFlag) {
    std::vector<double> growing(64);
    std::iota(growing.begin(), growing.end(), 1.0);
    const auto g = running_extreme(growing);
    EXPECT_EQ(g.value, 64.0);
    EXPECT_EQ(g.half_value, 32.0);
    EXPECT_FALSE(g.plateau);
    EXPECT_EQ(g.checkpoints.front(), (std::pair<std::size_t, double>{1, 1.0}));
    EXPECT_EQ(g.checkpoints.back(), (std::pair<std::size_t, double>{64, 64.0}));

    std::vector<double> flat(64, 1.0);
    flat[3] = 2.0;
    flat[40] = 2.09;
    EXPECT_TRUE(running_extreme(flat).plateau);
    flat[40] = 2.11;
    EXPECT_FALSE(running_extreme(flat).plateau);

    const auto mn = running_extreme({3.0, 1.0, 2.0, 0.99}, false);
    EXPECT_EQ(mn.value, 0.99);
    EXPECT_TRUE(mn.plateau);
}

TEST(ExpMoment, ZeroExponentLargeExponentAndMgf) {
    Rng rng(10);
    std::vector<double> xs(200000);
    for (double& x : xs) x = rng.exponential();
    EXPECT_EQ(exp_moment(xs, 0.0).estimate, 1.0);
    // E exp(eps X) = 1 / (1 - eps) for a unit exponential
    const auto d = exp_moment(xs, 0.2);
    EXPECT_NEAR(d.estimate, 1.25, 0.02);
    EXPECT_TRUE(d.stable);
    EXPECT_NEAR(d.tail_rate, 1.0, 0.2);
    EXPECT_FALSE(exp_moment(xs, 5.0).stable);
    EXPECT_THROW((void)exp_moment(xs, -1.0), ValidationError);
}

TEST(RatioBoundCheck, CylinderImageAndRankOne) {
    // points of the image simplex of [[2,1],[1,1]] have lambda_1 / lambda_2 in [1, 2]
    const auto A = RenormMatrix::from_rows({{2, 1}, {1, 1}});
    Rng rng(12);
    std::vector<FloatPoint> pts;
    for (int i = 0; i < 1000; ++i) pts.emplace_back(A.apply(sample_simplex(P2, rng).lengths()), P2);
    const auto r = ratio_bound_check(pts, {});
    EXPECT_LE(r.max_length_ratio.value, 2.0);
    EXPECT_GE(r.max_length_ratio.value, 1.9);
    EXPECT_EQ(r.min_norm_ratio.samples, 0u);

    const FloatPoint one({0.2, 0.8}, P2);
    EXPECT_DOUBLE_EQ(ratio_bound_check({one}, {}).max_length_ratio.value, 4.0);

    // rank one A = u v^T: |A lambda| / |A| = (v . lambda) / sum(v) >= min lambda_i
    const auto R = RenormMatrix::from_rows({{1, 3}, {2, 6}});
    const auto rr = ratio_bound_check(pts, {R});
    double min_lambda = 1.0;
    for (const auto& p : pts) min_lambda = std::min({min_lambda, p.lengths()[0], p.lengths()[1]});
    EXPECT_GE(rr.min_norm_ratio.value, min_lambda);
    EXPECT_THROW((void)ratio_bound_check({}, {}), InsufficientData);
}

TEST(HolderNorm, ConstantCoordinateAndIndicator) {
    Rng rng(13);
    const auto pairs = sample_holder_pairs(P2, 20000, rng);
    const auto c = holder_norm_estimate(ObservableSpec::user_table({{P2, 2.0}}), 1.0, pairs);
    EXPECT_EQ(c.seminorm.value, 0.0);
    EXPECT_EQ(c.lower_bound, 2.0);

    // |d lambda_1| <= lambda_1 lambda_2 d(x, y) <= d / 4 for nearby points
    const auto l = holder_norm_estimate(ObservableSpec::coordinate(0), 1.0, pairs);
    EXPECT_TRUE(l.seminorm.plateau);
    EXPECT_FALSE(l.non_holder);
    EXPECT_LE(l.seminorm.value, 0.25 + 1e-6);
    EXPECT_GT(l.seminorm.value, 0.2);

    const Word q = parse_word("a:1@2 1;b:1@2 1");
    for (double alpha : {0.5, 1.0}) {
        const auto ind = holder_norm_estimate(ObservableSpec::cylinder_indicator(q), alpha, pairs);
        EXPECT_TRUE(ind.non_holder) << alpha;
        EXPECT_GT(ind.seminorm.value, 10.0);
    }
}
