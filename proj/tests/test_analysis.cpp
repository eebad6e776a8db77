#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mginf/analysis.hpp"
#include "oracles.hpp"

namespace mginf {
namespace {

QueueConfig make_config(ServiceLaw law, double lambda, double horizon, std::uint64_t seed) {
    return QueueConfig{.lambda = lambda, .law = std::move(law), .horizon = horizon, .seed = seed};
}

TEST(RunningStats, TwoSamples) {
    RunningStats s;
    s.add(1.0);
    s.add(3.0);
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_DOUBLE_EQ(s.variance(), 2.0);
    EXPECT_DOUBLE_EQ(s.std_error(), 1.0);
}

TEST(RunningStats, MergeMatchesSequential) {
    RunningStats all;
    RunningStats left;
    RunningStats right;
    for (int i = 0; i < 1000; ++i) {
        const double x = std::sin(0.37 * i) * 100.0 + i;
        all.add(x);
        (i < 313 ? left : right).add(x);
    }
    left.merge(right);
    EXPECT_EQ(left.n, all.n);
    EXPECT_NEAR(left.mean, all.mean, 1e-12 * std::abs(all.mean));
    EXPECT_NEAR(left.variance(), all.variance(), 1e-10 * all.variance());
    RunningStats empty;
    empty.merge(all);
    EXPECT_EQ(empty.mean, all.mean);
}

TEST(TheoryOccupation, ExponentialAgainstSimpson) {
    const auto law = make_exponential_law(1.0);
    for (int k = 0; k <= 4; ++k) {
        auto f = [k](double t) {
            const double m = 1.0 - std::exp(-t);
            return std::pow(m, k) * std::exp(-m) / std::tgamma(k + 1.0);
        };
        const double ref = testing::simpson(f, 0.0, 50.0, 200'000);
        EXPECT_NEAR(theory_occupation(law, 1.0, k, 50.0), ref, 1e-9 * ref) << k;
    }
}

TEST(TheoryOccupation, DeterministicClosedForm) {
    const auto law = make_deterministic_law(1.0);
    const double T = 50.0;
    EXPECT_NEAR(theory_occupation(law, 1.0, 0, T), (1.0 - std::exp(-1.0)) + (T - 1.0) * std::exp(-1.0), 1e-10);
}

TEST(TheoryOccupation, SumsToHorizon) {
    const auto law = make_strange_law(2.5);
    double sum = 0.0;
    for (int k = 0; k <= 60; ++k) sum += theory_occupation(law, 1.0, k, 1000.0);
    EXPECT_NEAR(sum, 1000.0, 1e-6);
}

TEST(TheoryOccupation, RecurrentGrowsTransientConverges) {
    const auto exp_law = make_exponential_law(1.0);
    EXPECT_LT(theory_occupation(exp_law, 1.0, 0, 1e2), theory_occupation(exp_law, 1.0, 0, 1e3));
    const auto limit = theory_occupation_limit(make_pareto_law(0.5, 1.0), 1.0, 2, 100.0);
    EXPECT_TRUE(limit.converged);
    // e^{-(2 sqrt t - 1)} makes the k = 0 tail negligible past t ~ 1e3.
    const auto l0 = theory_occupation_limit(make_pareto_law(0.5, 1.0), 1.0, 0, 100.0);
    EXPECT_TRUE(l0.converged);
    EXPECT_FALSE(theory_occupation_limit(exp_law, 1.0, 0, 100.0, 1e-6, 5).converged);
}

TEST(RunIndexed, OrderIndependentOfThreads) {
    const std::function<double(std::size_t)> fn = [](std::size_t i) { return std::sqrt(static_cast<double>(i)); };
    const auto one = run_indexed<double>(100, 1, fn);
    const auto four = run_indexed<double>(100, 4, fn);
    EXPECT_EQ(one, four);
}

TEST(Experiment, BatchesMatchMonolithic) {
    const auto cfg = make_config(make_exponential_law(1.0), 1.0, 50.0, 17);
    const auto whole = run_replicas(cfg, 0, 60, 5, 1);
    auto parts = run_replicas(cfg, 0, 25, 5, 2);
    parts.merge(run_replicas(cfg, 25, 35, 5, 3));
    ASSERT_EQ(parts.replicas(), whole.replicas());
    for (int k = 0; k <= 5; ++k) {
        const auto& a = whole.occupation()[k];
        const auto& b = parts.occupation()[k];
        EXPECT_NEAR(a.mean, b.mean, 1e-9 * std::abs(a.mean));
        EXPECT_NEAR(a.variance(), b.variance(), 1e-9 * a.variance());
    }
    EXPECT_EQ(whole.late_min_histogram(), parts.late_min_histogram());
}

TEST(Experiment, ExponentialOccupationZScore) {
    const auto s = run_experiment(make_config(make_exponential_law(1.0), 1.0, 50.0, 1), 2000, 6);
    EXPECT_EQ(s.n_replicas, 2000u);
    ASSERT_TRUE(s.z_scores[0]);
    EXPECT_LE(std::abs(*s.z_scores[0]), 4.0);
    std::size_t total = 0;
    for (const auto& [v, c] : s.late_min_histogram) total += c;
    EXPECT_EQ(total, s.n_replicas);
}

TEST(Experiment, OverflowCountsAsFailure) {
    auto cfg = make_config(make_exponential_law(1.0), 1.0, 100.0, 1);
    cfg.max_events = 10;
    const auto acc = run_replicas(cfg, 0, 3, 2, 1);
    EXPECT_EQ(acc.replicas(), 0u);
    EXPECT_EQ(acc.failures().size(), 3u);
    EXPECT_THROW(run_experiment(cfg, 1, 2), std::invalid_argument);
}

std::vector<LateMinSample> samples(const std::vector<std::map<std::int64_t, std::size_t>>& hists) {
    std::vector<LateMinSample> out;
    double h = 100.0;
    for (const auto& hist : hists) {
        out.push_back({h, hist});
        h *= 10.0;
    }
    return out;
}

TEST(Liminf, RecurrentStabilizesAtZero) {
    const auto s = samples({{{0, 500}}, {{0, 499}, {1, 1}}, {{0, 500}}});
    const auto r = liminf_estimate(s, CriticalState::finite(0));
    EXPECT_EQ(r.trend, LiminfTrend::stabilized);
    EXPECT_EQ(r.stabilized_value, 0);
    EXPECT_TRUE(r.consistent);
}

TEST(Liminf, TransientKeepsGrowing) {
    const auto s = samples({{{3, 100}, {4, 400}}, {{7, 100}, {9, 400}}, {{20, 100}, {25, 400}}});
    const auto r = liminf_estimate(s, CriticalState::infinite());
    EXPECT_EQ(r.trend, LiminfTrend::growing);
    EXPECT_TRUE(r.consistent);
    EXPECT_EQ(r.verdict, "consistent with k0 = inf");
    EXPECT_EQ(r.horizons[0].lower_decile, 3);
}

TEST(Liminf, MixedStabilizesAtTwo) {
    const auto s = samples({{{0, 30}, {1, 80}, {2, 390}}, {{1, 40}, {2, 460}}, {{1, 20}, {2, 470}, {3, 10}}});
    const auto r = liminf_estimate(s, CriticalState::finite(2));
    EXPECT_EQ(r.stabilized_value, 2);
    EXPECT_TRUE(r.consistent);
    EXPECT_NEAR(r.horizons[0].fraction_below_k0, 110.0 / 500.0, 1e-15);
}

TEST(Liminf, DecreasingModeFlagsSmallHorizon) {
    const auto s = samples({{{2, 500}}, {{1, 500}}, {{1, 500}}});
    const auto r = liminf_estimate(s, CriticalState::finite(1));
    EXPECT_TRUE(r.horizon_too_small);
}

TEST(Liminf, RejectsBadHorizons) {
    std::vector<LateMinSample> s{{100.0, {{0, 1}}}, {1000.0, {{0, 1}}}};
    EXPECT_THROW(liminf_estimate(s, CriticalState::finite(0)), std::invalid_argument);
    s.push_back({5000.0, {{0, 1}}});
    EXPECT_THROW(liminf_estimate(s, CriticalState::finite(0)), std::invalid_argument);
}

}  // namespace
}  // namespace mginf
