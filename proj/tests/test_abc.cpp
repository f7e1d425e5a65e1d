#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "uniftest/abc.hpp"
#include "uniftest/distributions.hpp"
#include "uniftest/fixtures.hpp"
#include "uniftest/random.hpp"

using namespace uniftest;

namespace {

AbcConfig default_config(double eps = 0.3, double delta = 0.2, double L = 1.0) {
    AbcConfig c;
    c.epsilon = eps;
    c.delta = delta;
    c.lipschitz_bound = L;
    return c;
}

AbcConfig reduced_config(double c0 = 16.0) {
    AbcConfig c = default_config(0.4, 0.2, 4.0);
    c.c0 = c0;
    c.reduced = true;
    return c;
}

// Histogram over floor(x * m), clamped, without the library's binning code.
std::uint64_t k1_oracle(std::span<const double> xs, std::uint64_t m) {
    std::map<std::uint64_t, int> counts;
    for (double x : xs) {
        auto b = static_cast<std::uint64_t>(x * static_cast<double>(m));
        if (b >= m) b = m - 1;
        ++counts[b];
    }
    std::uint64_t k1 = 0;
    for (const auto& [b, c] : counts) k1 += c == 1;
    return k1;
}

}  // namespace

TEST(AbcConfig, DefaultC0) {
    // m0(0.3, 0.2) = 2712 < 28212
    EXPECT_DOUBLE_EQ(default_config().default_c0(), 28212.0);
    EXPECT_DOUBLE_EQ(default_config(0.3, 0.2, 20000.0).default_c0(), 40000.0);
    EXPECT_DOUBLE_EQ(default_config(0.01, 0.01).default_c0(), 28212.0);  // m0 = 8540
    EXPECT_DOUBLE_EQ(default_config(1e-4, 1e-7).default_c0(), static_cast<double>(compute_m0(1e-4, 1e-7)));
    EXPECT_GT(compute_m0(1e-4, 1e-7), 28212u);
}

TEST(AbcConfig, Validation) {
    auto c = default_config(0.3, 0.2, 100.0);
    c.c0 = 16.0;
    EXPECT_THROW(c.validate(), std::domain_error);
    c.reduced = true;
    EXPECT_NO_THROW(c.validate());
    EXPECT_THROW(default_config(0.0).validate(), std::domain_error);
    EXPECT_THROW(default_config(0.3, 0.0).validate(), std::domain_error);
    EXPECT_THROW(default_config(0.3, 0.2, 0.0).validate(), std::domain_error);
}

TEST(AbcSchedule, PinnedReferenceValues) {
    // 50-digit evaluation at c0 = 28212, delta = 0.2.
    constexpr std::array<std::uint64_t, 10> m{67650,     1121667,   5861351,   19059990,  47749696,
                                              101373474, 191913407, 334000817, 545012511, 845155990};
    constexpr std::array<std::uint64_t, 10> n{403, 3340, 11633, 28370, 56857, 100591, 163227, 248566, 360535, 503177};
    constexpr std::array<double, 10> tau{21.593784398381756, 44.741654924857111, 69.258769331687733,
                                         95.009038579057734, 121.86233637685651, 149.72081977334349,
                                         178.49312359551003, 208.107303008713,   238.49978081342604,
                                         269.61642949722162};
    const auto c = default_config();
    for (std::uint64_t k = 1; k <= 10; ++k) {
        const auto plan = abc_schedule(c, k);
        EXPECT_EQ(plan.bins, m[k - 1]) << k;
        EXPECT_EQ(plan.samples, n[k - 1]) << k;
        EXPECT_NEAR(plan.threshold, tau[k - 1], 1e-11 * tau[k - 1]) << k;
    }
}

TEST(AbcSchedule, KappaAndRange) {
    const auto c = default_config(0.3);
    EXPECT_EQ(c.kappa(), 6400u);
    EXPECT_THROW(abc_schedule(c, 0), std::domain_error);
    EXPECT_THROW(abc_schedule(c, 6401), std::domain_error);
}

TEST(AbcSchedule, Coupling) {
    const auto c = default_config();
    std::uint64_t prev_m = 0;
    for (std::uint64_t k = 1; k <= 200; ++k) {
        const auto plan = abc_schedule(c, k);
        const double kd = static_cast<double>(k), lg = std::log(kd + 10.0);
        ASSERT_GT(plan.bins, prev_m);
        prev_m = plan.bins;
        ASSERT_LE(static_cast<double>(plan.samples), std::sqrt(28212.0) * kd * kd * kd * lg + 1.0);
        ASSERT_GE(static_cast<double>(plan.bins), 28212.0 * kd * kd * kd * kd * lg);
        if (k >= 2) {
            const double n = static_cast<double>(plan.samples);
            ASSERT_LE(n * n, 1.01 * kd * kd * lg * static_cast<double>(plan.bins));
        }
    }
}

TEST(AbcSchedule, OverflowDetected) {
    auto c = default_config(0.01);
    EXPECT_THROW(abc_schedule(c, c.kappa()), std::overflow_error);
}

TEST(AbcSchedule, WorstCaseIsAstronomicalAtDefaultConstants) {
    for (double eps : {0.5, 0.3, 0.1}) EXPECT_GT(abc_worst_case_samples(default_config(eps)), 1e12) << eps;
}

TEST(K1Binned, MatchesOracle) {
    Rng rng(2);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> xs(1 + rng.below(300));
        for (auto& x : xs) x = rng.uniform01();
        const std::uint64_t m = 1 + rng.below(1000);
        ASSERT_EQ(k1_binned(xs, m), k1_oracle(xs, m));
    }
}

TEST(AbcStep, ConstantStreamExitsAtEpochOne) {
    const auto c = default_config();
    const auto plan = abc_schedule(c, 1);
    EXPECT_GT(expected_k1_uniform(plan.samples, plan.bins), plan.threshold + 1.0);
    AdaptiveBinningTest test(c);
    std::optional<Verdict> v;
    while (!v) v = test.step(0.5);
    EXPECT_EQ(v->decision, Decision::H1);
    EXPECT_EQ(v->exit_epoch, 1u);
    EXPECT_EQ(v->samples_used, 403u);
    EXPECT_THROW(test.step(0.5), TestFinished);
}

TEST(AbcStep, DistinctBinsGiveFullK1) {
    auto c = reduced_config(1e6);
    c.max_epochs_override = 1;
    const auto plan = abc_schedule(c, 1);
    AdaptiveBinningTest test(c);
    std::optional<EpochRecord> rec;
    test.set_observer([&](const EpochRecord& r) { rec = r; });
    std::optional<Verdict> v;
    for (std::uint64_t i = 0; !v; ++i) v = test.step((static_cast<double>(i) + 0.5) / static_cast<double>(plan.samples));
    ASSERT_TRUE(rec);
    EXPECT_EQ(rec->k1, plan.samples);
    EXPECT_EQ(v->decision, Decision::H0);
    EXPECT_EQ(v->samples_used, plan.samples);
}

TEST(AbcStep, RejectsSamplesOutsideUnitInterval) {
    AdaptiveBinningTest test(default_config());
    EXPECT_THROW(test.step(1.5), std::domain_error);
    EXPECT_THROW(test.step(-0.1), std::domain_error);
    EXPECT_THROW(test.step(std::nan("")), std::domain_error);
}

TEST(AbcStep, RebinningInvariant) {
    Rng rng(77);
    for (int trace = 0; trace < 1000; ++trace) {
        auto c = reduced_config(1.0 + 63.0 * rng.uniform01());
        c.threshold_multiplier = 0.5 + 4.0 * rng.uniform01();
        c.max_epochs_override = 1 + rng.below(5);
        AdaptiveBinningTest test(c);
        std::uint64_t epochs = 0;
        test.set_observer([&](const EpochRecord& r) {
            ++epochs;
            ASSERT_EQ(test.raw_samples().size(), r.samples);
            ASSERT_EQ(r.samples, abc_schedule(c, r.epoch).samples);
            ASSERT_EQ(r.k1, k1_oracle(test.raw_samples(), r.bins));
        });
        const bool skewed = trace % 2 == 1;
        std::optional<Verdict> v;
        while (!v) {
            const double u = rng.uniform01();
            v = test.step(skewed ? u * u : u);
        }
        ASSERT_EQ(v->exit_epoch ? *v->exit_epoch : c.kappa(), epochs);
        ASSERT_EQ(test.raw_samples().size(), v->samples_used);
    }
}

TEST(AbcRun, TruncationReported) {
    EXPECT_THROW(abc_run(default_config(), []() -> std::optional<double> { return std::nullopt; }), TruncatedStream);
}

TEST(AbcRun, ReducedModeSeparatesLowerBoundDensity) {
    auto c = reduced_config();
    c.threshold_multiplier = 2.0;
    c.max_epochs_override = 12;
    const auto spec = LowerBoundFamilySpec::resolve(4.0, 0.4, 0.25).with_bits({1});
    const auto alt = ContinuousSource::from_density(make_lower_bound_density(spec), "lb");
    ASSERT_NEAR(alt.gamma(), 0.5, 1e-12);
    const auto uni = ContinuousSource::uniform();
    int h1 = 0, h0 = 0;
    for (int t = 0; t < 100; ++t) {
        Rng r1(trial_seed(41, 1, t)), r0(trial_seed(41, 0, t));
        h1 += abc_run(c, [&]() -> std::optional<double> { return alt.draw(r1); }).decision == Decision::H1;
        h0 += abc_run(c, [&]() -> std::optional<double> { return uni.draw(r0); }).decision == Decision::H0;
    }
    EXPECT_GE(h1, 80);
    EXPECT_GE(h0, 80);
}

TEST(AbcPredictExitEpoch, MinimalAndBounded) {
    const auto c = default_config(0.3);
    for (double g = 0.32; g < 2.0; g += 0.04) {
        const auto k = abc_predict_exit_epoch(g, c);
        EXPECT_LE(k, static_cast<std::uint64_t>(std::ceil(576.0 / (g * g)))) << g;
        auto ok = [&](std::uint64_t j) {
            const double b = g - 1.0 / static_cast<double>(abc_schedule(c, j).bins);
            return b > 0.0 && static_cast<double>(j) >= 144.0 / (b * b);
        };
        EXPECT_TRUE(ok(k));
        if (k > 1) {
            EXPECT_FALSE(ok(k - 1));
        }
    }
}

TEST(AbcPredictExitEpoch, NegligibleBinningLoss) {
    auto c = default_config(0.3);
    c.c0 = 1e12;
    const auto k = abc_predict_exit_epoch(0.5, c);
    EXPECT_GE(k, 576u);
    EXPECT_LE(k, 577u);
    EXPECT_THROW(abc_predict_exit_epoch(0.0, c), std::domain_error);
}
