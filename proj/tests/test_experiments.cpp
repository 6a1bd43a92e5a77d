#include <cmath>
#include <algorithm>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "rauzy/experiments.hpp"
#include "rauzy/io.hpp"

using namespace rauzy;

namespace {

const Permutation P2({2, 1});
const Permutation P3({3, 2, 1});

/// Occurrence starts of q in an orbit's letter stream, by direct comparison.
std::vector<std::size_t> direct_occurrences(const Orbit<double>& orb, const Word& q) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i + q.size() <= orb.entries.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < q.size() && match; ++j) match = orb.entries[i + j].record.letter() == q[j];
        if (match) out.push_back(i);
    }
    return out;
}

Word letters_between(const Orbit<double>& orb, std::size_t from, std::size_t to) {
    Word w;
    for (std::size_t i = from; i < to; ++i) w.push_back(orb.entries[i].record.letter());
    return w;
}

PipelineConfig small_config(const Permutation& pi, std::size_t steps) {
    PipelineConfig c;
    c.pi = pi;
    c.steps = steps;
    c.burn_in = 100;
    c.streams = 4;
    return c;
}

}  // namespace

TEST(ReturnSurvey, SelfMatchStartsAtZero) {
    Rng rng(1);
    const auto orb = orbit(sample_simplex(P3, rng), 3000);
    const Word q = letters_between(orb, 0, 3);
    const auto recs = return_time_survey(orb, q);
    ASSERT_FALSE(recs.empty());
    EXPECT_EQ(recs.front().idx, 0u);
    EXPECT_TRUE(recs.front().start_in_q);
}

TEST(ReturnSurvey, MatchesDirectScanAndMatrixOracle) {
    const Word q = parse_word("a:1@2 1;b:1@2 1");
    Rng rng(2);
    const auto orb = orbit(sample_simplex(P2, rng), 100000);
    const auto occ = direct_occurrences(orb, q);
    ASSERT_GT(occ.size(), 0u);
    const auto recs = return_time_survey(orb, q);
    const auto complete = complete_returns(recs);
    // one complete gap between each pair of consecutive occurrences
    ASSERT_EQ(complete.size(), occ.size() - 1);
    for (std::size_t i = 0; i < complete.size(); ++i) {
        const auto& r = complete[i];
        EXPECT_EQ(r.idx, occ[i]);
        EXPECT_EQ(r.n_q, occ[i + 1] - occ[i]);
        EXPECT_GT(r.eta, r.tau);
        EXPECT_GE(r.n_q, 1u);
    }
    // eta, lognorm, len_w and tau against the exact matrix of the gap word
    for (std::size_t i = 0; i < complete.size(); i += complete.size() / 50 + 1) {
        const auto& r = complete[i];
        const Word w = letters_between(orb, r.idx, r.idx + r.n_q);
        const RenormMatrix A = word_matrix(w);
        EXPECT_NEAR(r.eta, log_big(matrix_norm(A)), 1e-12 * r.eta);
        EXPECT_NEAR(r.lognorm, log_big(max_entry(A)), 1e-12 * r.eta);
        std::uint64_t len = 0;
        for (const auto& l : w.letters()) len += l.n;
        EXPECT_EQ(r.len_w, len);
        const auto img = A.apply(orb.entries[r.idx + r.n_q].start.lengths());
        EXPECT_NEAR(r.tau, std::log(std::accumulate(img.begin(), img.end(), 0.0)), 1e-9);
    }
}

TEST(ReturnSurvey, OverlappingOccurrencesAndPartialGap) {
    Rng rng(3);
    const auto orb = orbit(sample_simplex(P3, rng), 5000);
    const Word q = letters_between(orb, 10, 11);
    const auto recs = return_time_survey(orb, q);
    const auto occ = direct_occurrences(orb, q);
    ASSERT_FALSE(recs.empty());
    // the leading partial gap runs from step 0 to the first occurrence
    EXPECT_FALSE(recs.front().start_in_q);
    EXPECT_EQ(recs.front().idx, 0u);
    EXPECT_EQ(recs.front().n_q, occ.front());
    EXPECT_EQ(complete_returns(recs).size(), occ.size() - 1);
    EXPECT_TRUE(return_time_survey(orb, parse_word("a:1000@3 2 1")).empty());
    EXPECT_THROW((void)return_time_survey(orb, Word{}), ValidationError);
}

TEST(ReturnSurvey, ExactAndFloatAgreeUntilThePrecisionEvent) {
    const Word q = parse_word("a:1@2 1;b:1@2 1");
    Rng rng(4);
    std::size_t compared = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const FloatPoint x = sample_simplex(P2, rng);
        const auto fo = orbit(x, 200);
        // a dyadic start reaches the boundary after a few dozen exact steps
        Orbit<BigInt> eo;
        try {
            (void)walk_orbit(ExactPoint::from_doubles(x.lengths(), P2), 200, OrbitOptions{},
                             [&](const OrbitEntry<BigInt>& e) { eo.entries.push_back(e); });
        } catch (const NumericError&) {
        }
        std::size_t horizon = std::min(fo.entries.size(), eo.entries.size());
        for (const auto& e : fo.events) horizon = std::min(horizon, e.step);
        Orbit<double> ft;
        ft.entries.assign(fo.entries.begin(), fo.entries.begin() + static_cast<std::ptrdiff_t>(horizon));
        Orbit<BigInt> et;
        et.entries.assign(eo.entries.begin(), eo.entries.begin() + static_cast<std::ptrdiff_t>(horizon));
        const auto a = return_time_survey(ft, q), b = return_time_survey(et, q);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].idx, b[i].idx);
            EXPECT_EQ(a[i].n_q, b[i].n_q);
            EXPECT_EQ(a[i].len_w, b[i].len_w);
            EXPECT_EQ(a[i].eta, b[i].eta);
            // branch decisions are certified up to the horizon; values carry the float error
            EXPECT_NEAR(a[i].tau, b[i].tau, 1e-6);
        }
        compared += a.size();
    }
    EXPECT_GE(compared, 10u);
}

TEST(Comparison, SingleLetterRatioAndPlateau) {
    const Letter b1(Op::b, 1, P2);
    ReturnRecord r;
    r.n_q = 1;
    r.eta = log_big(matrix_norm(letter_matrix(b1)));
    r.tau = 0.1;
    r.start_in_q = true;
    const auto s = comparison_survey({r});
    EXPECT_NEAR(s.word_ratio.value, 1.0 / std::log(3.0), 1e-15);
    EXPECT_EQ(s.violations, 0u);
    r.tau = r.eta;
    EXPECT_EQ(comparison_survey({r}).violations, 1u);
}

TEST(Pipelines, ReturnsSatisfyTheCocycleBounds) {
    auto cfg = small_config(P2, 200000);
    const Word q = find_positive_word(rauzy_class(P2), 4);
    const auto run = run_returns(cfg, q, 50);
    ASSERT_GT(run.records.size(), 1000u);
    const auto cmp = comparison_survey(run.records);
    EXPECT_EQ(cmp.violations, 0u);
    EXPECT_GE(cmp.eta_minus_tau.value, 0.0);
    EXPECT_GT(cmp.word_ratio.value, 0.0);
    // every point met at an occurrence lies in the cylinder of q
    ASSERT_EQ(run.q_points.size(), 4 * 50u);
    for (const auto& x : run.q_points) EXPECT_TRUE(cylinder_contains(q, x));
    // the tail of the return time is geometric-looking
    const auto f = tail_fit(return_times(run.records), 40);
    EXPECT_LT(f.theta, 1.0);
    EXPECT_GE(f.r_squared, 0.9);
    const auto mom = return_moments(run.records, 0.01);
    EXPECT_TRUE(mom.tau.stable);
    EXPECT_TRUE(mom.n_q.stable);
}

TEST(Pipelines, CorrelationsDecreaseForTwoIntervals) {
    auto cfg = small_config(P2, 2000000);
    const auto phi = ObservableSpec::coordinate(0);
    const auto run = run_correlations(cfg, phi, phi, 6);
    const auto& s = run.series;
    EXPECT_GT(s[0].corr, 0.0);
    // |c_n| falls until it reaches the noise floor
    for (std::size_t n = 1; n < s.size() && std::abs(s[n - 1].corr) > 3 * s[n - 1].stderr; ++n)
        EXPECT_LT(std::abs(s[n].corr), std::abs(s[n - 1].corr)) << n;
}

TEST(Pipelines, DeterministicForAnyWorkerCount) {
    auto cfg = small_config(P3, 400000);
    const auto phi = ObservableSpec::coordinate(0);
    const Word q = find_positive_word(rauzy_class(P3), 8);
    std::string corr[2], rets[2];
    for (int i = 0; i < 2; ++i) {
        cfg.workers = i == 0 ? 1 : 3;
        std::ostringstream a, b;
        write_correlations_csv(a, run_correlations(cfg, phi, phi, 5).series);
        write_returns_csv(b, run_returns(cfg, q).records);
        corr[i] = a.str();
        rets[i] = b.str();
    }
    EXPECT_EQ(corr[0], corr[1]);
    EXPECT_EQ(rets[0], rets[1]);
    cfg.seed = 2;
    std::ostringstream c;
    write_correlations_csv(c, run_correlations(cfg, phi, phi, 5).series);
    EXPECT_NE(c.str(), corr[0]);
}

TEST(Pipelines, RestartsAfterNumericFailures) {
    auto cfg = small_config(P3, 20000);
    cfg.cap = 2;
    const Word q = find_positive_word(rauzy_class(P3), 8);
    const auto run = run_returns(cfg, q);
    EXPECT_GT(run.stats.restarts, 0u);
    EXPECT_EQ(run.stats.events.size(), run.stats.restarts);
    EXPECT_EQ(run.stats.events.front().name, "restart_cap_exceeded");
    EXPECT_EQ(run.stats.g_steps, 20000u);
}

TEST(Pipelines, ConfigValidation) {
    auto cfg = small_config(P2, 100);
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg.steps = 1000;
    cfg.streams = 20;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg.streams = 1;
    cfg.lambda = std::vector<double>{0.3, 0.3, 0.4};
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg.lambda.reset();
    cfg.pi = Permutation({1, 2});
    EXPECT_THROW(cfg.validate(), ValidationError);
    auto short_run = small_config(P2, 1000);
    EXPECT_THROW((void)run_correlations(short_run, ObservableSpec::coordinate(0), ObservableSpec::coordinate(0), 50),
                 InsufficientData);
}

TEST(Pipelines, FixedStartUsesOneStream) {
    auto cfg = small_config(P2, 5000);
    cfg.lambda = std::vector<double>{0.41421356, 0.58578644};
    cfg.burn_in = 0;
    const Word q = parse_word("a:1@2 1;b:1@2 1");
    const auto run = run_returns(cfg, q);
    // the pipeline restarts after a numeric failure; compare the first segment
    Orbit<double> orb;
    try {
        (void)walk_orbit(FloatPoint({0.41421356, 0.58578644}, P2), 5000, OrbitOptions{},
                         [&](const OrbitEntry<double>& e) { orb.entries.push_back(e); });
    } catch (const NumericError&) {
    }
    const auto direct = return_time_survey(orb, q);
    ASSERT_GT(direct.size(), 10u);
    for (std::size_t i = 0; i < direct.size(); ++i) {
        EXPECT_EQ(run.records[i].idx, direct[i].idx);
        EXPECT_EQ(run.records[i].n_q, direct[i].n_q);
    }
}

TEST(ExactReturns, StopsAtTheBoundary) {
    const Word q = parse_word("a:1@2 1;b:1@2 1");
    const auto run = run_returns_exact(ExactPoint::from_rationals({Rational(1, 3), Rational(2, 3)}, P2), 100, q);
    ASSERT_TRUE(run.stopped.has_value());
    EXPECT_EQ(run.stopped->step, 0u);
    EXPECT_TRUE(run.records.empty());
}

TEST(ShrinkProfile, ContractsByTheBirkhoffFactor) {
    const auto g = rauzy_class(P3);
    const ClassDynamics dyn(g);
    const Word q = find_positive_word(g, 8);
    std::vector<NodeLetter> qn;
    for (const auto& l : q.letters()) qn.push_back(dyn.to_node_letter(l));
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<NodeLetter> it;
        std::vector<double> lam = sample_simplex(P3, rng).lengths();
        std::size_t node = 0;
        for (int i = 0; i < 20000; ++i) it.push_back(dyn.zorich(lam, node));
        // start the itinerary at the first occurrence of q, so the first diameter is that of A(q)
        const auto first = std::search(it.begin(), it.end(), qn.begin(), qn.end(),
                                       [](const NodeLetter& x, const NodeLetter& y) { return x.same_letter(y); });
        ASSERT_NE(first, it.end());
        it.erase(it.begin(), first);
        const auto p = cylinder_shrink_profile(dyn, it, q, 1e-10);
        ASSERT_GE(p.diameters.size(), 2u);
        EXPECT_NEAR(p.diameters[0], p.q_diameter, 1e-12);
        EXPECT_NEAR(p.contraction, std::tanh(p.q_diameter / 4), 1e-15);
        for (std::size_t k = 0; k < p.diameters.size(); ++k)
            EXPECT_LE(p.diameters[k], std::pow(p.contraction, static_cast<double>(k)) * p.q_diameter * (1 + 1e-9));
        EXPECT_LE(p.per_occurrence_factor(), p.contraction + 1e-9);
        const auto k = p.occurrences_to(1e-10);
        ASSERT_TRUE(k.has_value());
        EXPECT_LT(p.diameters[*k - 1], 1e-10);
    }
    EXPECT_THROW((void)cylinder_shrink_profile(dyn, {}, parse_word("a:1@3 2 1")), ValidationError);
}

TEST(ShrinkProfile, FloatDiametersAgreeWithExactProductsWithinTheBound) {
    const auto g = rauzy_class(P3);
    const ClassDynamics dyn(g);
    const Word q = find_positive_word(g, 8);
    std::vector<NodeLetter> qn;
    for (const auto& l : q.letters()) qn.push_back(dyn.to_node_letter(l));
    Rng rng(9);
    std::size_t compared = 0;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<NodeLetter> it;
        std::vector<double> lam = sample_simplex(P3, rng).lengths();
        std::size_t node = 0;
        for (int i = 0; i < 5000; ++i) it.push_back(dyn.zorich(lam, node));
        const auto p = cylinder_shrink_profile(dyn, it, q, 0.0);
        // exact oracle: BigInt prefix products at the same disjoint occurrences
        RenormMatrix P = RenormMatrix::identity(3);
        auto add = [&](const NodeLetter& l) {
            std::size_t n = l.start;
            for (std::uint64_t s = 0; s < l.count; ++s) {
                right_multiply_elementary(P, l.op, dyn.k(n));
                n = dyn.next(n, l.op);
            }
        };
        std::size_t i = 0, k = 0;
        while (i + qn.size() <= it.size() && k < p.diameters.size()) {
            bool match = true;
            for (std::size_t j = 0; j < qn.size() && match; ++j) match = it[i + j].same_letter(qn[j]);
            if (!match) {
                add(it[i++]);
                continue;
            }
            for (std::size_t j = 0; j < qn.size(); ++j) add(it[i++]);
            const double exact = birkhoff_diameter(P);
            EXPECT_LE(std::abs(p.diameters[k] - exact), p.errors[k]) << trial << " " << k;
            EXPECT_LT(p.errors[k], 1e-9);
            ++k;
            ++compared;
        }
        EXPECT_EQ(k, p.diameters.size());
    }
    EXPECT_GT(compared, 20u);
}
