#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mginf/classifier.hpp"
#include "mginf/service_law.hpp"

namespace mginf {
namespace {

using Kind = CriticalState::Kind;

TEST(ClassifySymbolic, StrangeIsMixed) {
    const auto r = classify_symbolic(make_strange_law(2.5), 1.0);
    EXPECT_EQ(r.k0, CriticalState::finite(2));
    EXPECT_EQ(r.regime, Regime::mixed);
    EXPECT_EQ(r.method, Method::symbolic_profile);
    ASSERT_EQ(r.verdicts.size(), static_cast<std::size_t>(kDefaultKMax + 1));
    EXPECT_EQ(r.verdicts[1].divergence, Divergence::convergent);
    EXPECT_EQ(r.verdicts[2].divergence, Divergence::divergent);
}

TEST(ClassifySymbolic, ExponentialIsRecurrent) {
    const auto r = classify_symbolic(make_exponential_law(1.0), 1.0);
    EXPECT_EQ(r.k0, CriticalState::finite(0));
    EXPECT_EQ(r.regime, Regime::recurrent);
}

TEST(ClassifySymbolic, HeavyParetoIsTransient) {
    const auto r = classify_symbolic(make_pareto_law(0.5, 1.0), 1.0);
    EXPECT_EQ(r.k0, CriticalState::infinite());
    EXPECT_EQ(r.regime, Regime::transient);
    EXPECT_EQ(to_string(r.k0), "inf");
}

TEST(ClassifySymbolic, ParetoUnitAlphaDependsOnRate) {
    EXPECT_EQ(classify_symbolic(make_pareto_law(1.0, 1.0), 0.5).k0, CriticalState::finite(0));
    EXPECT_EQ(classify_symbolic(make_pareto_law(1.0, 1.0), 2.0).k0, CriticalState::infinite());
    // p = 1 with beta = 0: k0 = max(0, ceil(-1)) = 0.
    EXPECT_EQ(classify_symbolic(make_pareto_law(1.0, 1.0), 1.0).k0, CriticalState::finite(0));
}

TEST(ClassifySymbolic, StrangeFamilyCeilRule) {
    for (double b : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.7, 6.2}) {
        const auto r = classify_symbolic(make_strange_law(b), 1.0);
        EXPECT_EQ(r.k0, CriticalState::finite(static_cast<std::int64_t>(std::ceil(b)) - 1)) << b;
    }
}

TEST(ClassifySymbolic, MonotoneInBeta) {
    std::int64_t prev = 0;
    for (double b = 0.1; b < 8.0; b += 0.05) {
        const auto k0 = classify_symbolic(AsymptoticProfile::log_class(1.0, b), 1.0).k0;
        ASSERT_EQ(k0.kind, Kind::finite);
        EXPECT_GE(k0.value, prev) << b;
        prev = k0.value;
    }
}

TEST(ClassifySymbolic, DependsOnlyOnScaledProfile) {
    // (lambda, L, beta) and (lambda c, L / c, beta / c) give the same k0.
    for (double c : {0.25, 0.5, 2.0, 4.0}) {
        for (double beta : {0.0, 1.0, 2.5, 3.7}) {
            for (double L : {0.5, 1.0, 2.0}) {
                const auto a = classify_symbolic(AsymptoticProfile::log_class(L, beta), 1.0).k0;
                const auto b = classify_symbolic(AsymptoticProfile::log_class(L / c, beta / c), c).k0;
                EXPECT_EQ(a, b) << c << ' ' << beta << ' ' << L;
            }
        }
    }
}

TEST(ClassifySymbolic, IntegerBoundaryCountsDivergent) {
    // lambda beta - 1 = 2 exactly: k = 2 is divergent.
    const auto r = classify_symbolic(AsymptoticProfile::log_class(1.0, 3.0), 1.0);
    EXPECT_EQ(r.k0, CriticalState::finite(2));
    EXPECT_TRUE(r.warnings.empty());
}

TEST(ClassifySymbolic, HigherOrderTermsOnBoundaryAreUnsupported) {
    auto profile = AsymptoticProfile::log_class(1.0, 3.0);
    profile.has_higher_order_terms = true;
    const auto r = classify_symbolic(profile, 1.0);
    EXPECT_TRUE(r.outside_supported_class);
    EXPECT_EQ(r.k0, CriticalState::at_least(2));
    EXPECT_EQ(r.regime, Regime::undetermined);
    EXPECT_FALSE(r.warnings.empty());
    EXPECT_FALSE(r.conclusive());
    // Off the boundary the extra terms do not matter.
    profile.loglog_coefficient = 2.5;
    EXPECT_EQ(classify_symbolic(profile, 1.0).k0, CriticalState::finite(2));
}

TEST(ClassifySymbolic, Errors) {
    EXPECT_THROW(classify_symbolic(make_exponential_law(1.0), 0.0), std::invalid_argument);
    AsymptoticProfile uncertified = AsymptoticProfile::log_class(1.0, 2.0);
    uncertified.beta_known = false;
    EXPECT_THROW(classify_symbolic(uncertified, 1.0), ProfileNotCertified);
    const auto bare = make_numeric_law(
        "bare", [](double u) { return u < 1.0 ? 1.0 : 1.0 / (u * u); }, [](double v) { return 1.0 / std::sqrt(v); }, 1.0);
    EXPECT_THROW(classify_symbolic(bare, 1.0), ProfileNotCertified);
}

TEST(ClassifyNumeric, StrangeVerdicts) {
    NumericClassifyOptions opts;
    opts.k_max = 4;
    const auto r = classify_numeric(make_strange_law(2.5), 1.0, opts);
    ASSERT_EQ(r.verdicts.size(), 5u);
    EXPECT_EQ(r.verdicts[0].divergence, Divergence::convergent);
    EXPECT_EQ(r.verdicts[1].divergence, Divergence::convergent);
    for (int k = 2; k <= 4; ++k) EXPECT_EQ(r.verdicts[k].divergence, Divergence::divergent) << k;
    EXPECT_EQ(r.k0, CriticalState::finite(2));
    EXPECT_EQ(r.method, Method::numeric_diagnostic);
    EXPECT_TRUE(r.verdicts[0].numeric_only);
    EXPECT_TRUE(r.warnings.empty());
}

TEST(ClassifyNumeric, BoundedMeanDivergesAtZero) {
    NumericClassifyOptions opts;
    opts.k_max = 3;
    for (const auto& law : {make_exponential_law(1.0), make_pareto_law(2.0, 1.0)}) {
        const auto r = classify_numeric(law, 1.0, opts);
        EXPECT_EQ(r.verdicts[0].divergence, Divergence::divergent) << law.name();
        EXPECT_EQ(r.k0, CriticalState::finite(0)) << law.name();
    }
}

TEST(ClassifyNumeric, TransientReportsLowerBoundOnly) {
    NumericClassifyOptions opts;
    opts.k_max = 4;
    const auto r = classify_numeric(make_pareto_law(0.5, 1.0), 1.0, opts);
    EXPECT_EQ(r.k0, CriticalState::at_least(5));
    EXPECT_EQ(r.regime, Regime::undetermined);
    EXPECT_TRUE(numeric_agrees(r, classify_symbolic(make_pareto_law(0.5, 1.0), 1.0, 4), 4));
}

TEST(ClassifyNumeric, TraceOnRequest) {
    NumericClassifyOptions opts;
    opts.k_max = 1;
    opts.keep_trace = true;
    const auto r = classify_numeric(make_exponential_law(1.0), 1.0, opts);
    ASSERT_FALSE(r.verdicts[0].trace.empty());
    EXPECT_EQ(r.verdicts[0].trace.size(), static_cast<std::size_t>(opts.log2_horizon_budget - opts.first_log2));
    opts.keep_trace = false;
    EXPECT_TRUE(classify_numeric(make_exponential_law(1.0), 1.0, opts).verdicts[0].trace.empty());
}

TEST(ClassifyNumeric, RejectsBadBudget) {
    NumericClassifyOptions opts;
    opts.log2_horizon_budget = 12;
    EXPECT_THROW(classify_numeric(make_exponential_law(1.0), 1.0, opts), std::invalid_argument);
    opts.log2_horizon_budget = 2000;
    EXPECT_THROW(classify_numeric(make_exponential_law(1.0), 1.0, opts), std::invalid_argument);
}

TEST(ClassifyNumeric, ScaledProfileStillAgrees) {
    // pareto(1, 2) at lambda = 0.5 sits on the boundary p = 1 with beta = 0.
    NumericClassifyOptions opts;
    opts.k_max = 3;
    const auto law = make_pareto_law(1.0, 2.0);
    EXPECT_TRUE(numeric_agrees(classify_numeric(law, 0.5, opts), classify_symbolic(law, 0.5, 3), 3));
}

TEST(EstimateProfile, StrangeLaw) {
    const auto e = estimate_profile(make_strange_law(2.5));
    EXPECT_EQ(e.profile.growth, GrowthClass::logarithmic);
    EXPECT_GE(e.profile.log_coefficient, 0.98);
    EXPECT_LE(e.profile.log_coefficient, 1.02);
    EXPECT_GE(e.profile.loglog_coefficient, 2.2);
    EXPECT_LE(e.profile.loglog_coefficient, 2.8);
    EXPECT_FALSE(e.profile.beta_known);
}

TEST(EstimateProfile, BoundedAndSuperLog) {
    EXPECT_EQ(estimate_profile(make_exponential_law(1.0)).profile.growth, GrowthClass::bounded_mean);
    EXPECT_EQ(estimate_profile(make_pareto_law(2.0, 1.0)).profile.growth, GrowthClass::bounded_mean);
    EXPECT_EQ(estimate_profile(make_pareto_law(0.5, 1.0)).profile.growth, GrowthClass::super_logarithmic);
}

TEST(EstimateProfile, ParetoUnitAlpha) {
    const auto e = estimate_profile(make_pareto_law(1.0, 3.0));
    EXPECT_EQ(e.profile.growth, GrowthClass::logarithmic);
    EXPECT_GE(e.profile.log_coefficient, 2.9);
    EXPECT_LE(e.profile.log_coefficient, 3.1);
}

TEST(EstimateProfile, NarrowWindowIsLowConfidence) {
    ProfileFitOptions opts;
    opts.t_max = 1e3;
    opts.decades = 1e-3;
    opts.max_condition = 1e3;
    EXPECT_TRUE(estimate_profile(make_strange_law(2.5), opts).low_confidence);
}

TEST(CriticalState, Formatting) {
    EXPECT_EQ(to_string(CriticalState::finite(3)), "3");
    EXPECT_EQ(to_string(CriticalState::infinite()), "inf");
    EXPECT_EQ(to_string(CriticalState::at_least(5)), ">=5");
    EXPECT_EQ(regime_for(CriticalState::finite(0)), Regime::recurrent);
    EXPECT_EQ(regime_for(CriticalState::finite(1)), Regime::mixed);
}

}  // namespace
}  // namespace mginf
