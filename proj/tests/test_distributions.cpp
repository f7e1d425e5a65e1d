#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "uniftest/coincidence.hpp"
#include "uniftest/distributions.hpp"
#include "uniftest/random.hpp"

using namespace uniftest;

namespace {

// Composite trapezoid rule on a fine grid.
template <class F>
double trapezoid(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n; ++i) s += f(a + i * h);
    return s * h;
}

LowerBoundFamilySpec random_family(Rng& rng) {
    for (;;) {
        const double L = 0.5 + 40.0 * rng.uniform01();
        const double eta = 0.05 + 0.95 * rng.uniform01();
        const double eps = 0.02 + 0.5 * rng.uniform01();
        try {
            return LowerBoundFamilySpec::resolve(L, eps, eta).with_random_bits(rng);
        } catch (const std::domain_error&) {
        }
    }
}

}  // namespace

TEST(DiscreteDistribution, Validation) {
    EXPECT_THROW(DiscreteDistribution({}), std::domain_error);
    EXPECT_THROW(DiscreteDistribution({0.5, 0.6}), std::domain_error);
    EXPECT_THROW(DiscreteDistribution({1.5, -0.5}), std::domain_error);
    EXPECT_THROW(DiscreteDistribution({std::numeric_limits<double>::quiet_NaN(), 1.0}), std::domain_error);
    EXPECT_NO_THROW(DiscreteDistribution({0.25, 0.25, 0.5}));
}

TEST(MakePerturbed, MassesAndDistance) {
    const auto p = make_perturbed(10, 0.3);
    EXPECT_NEAR(p[0], 1.3 / 10, 1e-15);
    EXPECT_NEAR(p[1], 0.7 / 10, 1e-15);
    EXPECT_NEAR(l1_to_uniform(p), 0.3, 1e-12);
    EXPECT_THROW(make_perturbed(9, 0.3), std::domain_error);
    EXPECT_THROW(make_perturbed(10, 1.2), std::domain_error);
    EXPECT_THROW(make_perturbed(10, -0.1), std::domain_error);
}

TEST(MakePerturbed, SecondMomentExcess) {
    // sum p_j^2 = (1 + gamma^2) / m for this family
    const std::uint64_t m = 20000;
    const auto p = make_perturbed(m, 0.6);
    double s = 0.0;
    for (std::uint64_t j = 0; j < m; ++j) s += p[j] * p[j];
    EXPECT_NEAR(s * m, 1.36, 1e-9);
}

TEST(SampleDiscrete, FrequenciesMatch) {
    Rng rng(3);
    const DiscreteDistribution p({0.1, 0.2, 0.3, 0.4});
    std::vector<int> c(4, 0);
    const int n = 200000;
    for (int i = 0; i < n; ++i) ++c[sample_discrete(p, rng)];
    double chi2 = 0.0;
    for (int j = 0; j < 4; ++j) chi2 += std::pow(c[j] - n * p[j], 2) / (n * p[j]);
    EXPECT_LT(chi2, 16.27);  // chi^2_3 upper 0.001 quantile
}

TEST(SampleDiscrete, NeverReturnsZeroMassSymbol) {
    Rng rng(4);
    const DiscreteDistribution p({0.5, 0.0, 0.5, 0.0});
    for (int i = 0; i < 10000; ++i) {
        const auto s = sample_discrete(p, rng);
        ASSERT_TRUE(s == 0 || s == 2);
    }
}

TEST(LipschitzDensity, Validation) {
    EXPECT_THROW(LipschitzDensity({0.0, 1.0}, {1.0, 1.0, 1.0}, 1.0), std::domain_error);
    EXPECT_THROW(LipschitzDensity({0.1, 1.0}, {1.0, 1.0}, 1.0), std::domain_error);
    EXPECT_THROW(LipschitzDensity({0.0, 0.5, 0.5, 1.0}, {1, 1, 1, 1}, 1.0), std::domain_error);
    EXPECT_THROW(LipschitzDensity({0.0, 1.0}, {0.5, 1.5}, 0.9), std::domain_error);  // slope 1 > L
    EXPECT_THROW(LipschitzDensity({0.0, 1.0}, {1.0, 1.1}, 1.0), std::domain_error);  // mass 1.05
    EXPECT_THROW(LipschitzDensity({0.0, 1.0}, {-0.1, 2.1}, 5.0), std::domain_error);
    EXPECT_NO_THROW(LipschitzDensity({0.0, 1.0}, {0.5, 1.5}, 1.0));
}

TEST(LipschitzDensity, CdfQuantileRoundTrip) {
    const LipschitzDensity f({0.0, 0.3, 0.7, 1.0}, {0.5, 1.15, 1.15, 0.8}, 3.0);
    EXPECT_NEAR(f.total_mass(), 1.0, 1e-12);
    for (double u = 0.0; u <= 1.0; u += 0.01) EXPECT_NEAR(f.cdf(f.quantile(u)), u, 1e-12) << u;
    for (double x = 0.0; x <= 1.0; x += 0.01)
        EXPECT_NEAR(f.cdf(x), trapezoid(f, 0.0, x, 20000), 1e-8) << x;
}

TEST(LipschitzDensity, QuantileWithZeroDensityStretch) {
    const LipschitzDensity f({0.0, 0.5, 1.0}, {0.0, 2.0, 0.0}, 4.0);
    EXPECT_NEAR(f.quantile(0.125), 0.25, 1e-12);
    EXPECT_NEAR(f.quantile(0.5), 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(f.quantile(0.0), 0.0);
    EXPECT_DOUBLE_EQ(f.quantile(1.0), 1.0);
}

TEST(SampleDensity, KolmogorovSmirnov) {
    const LipschitzDensity f({0.0, 0.25, 0.5, 0.75, 1.0}, {0.5, 1.5, 0.5, 1.5, 0.5}, 4.0);
    Rng rng(12);
    const int n = 20000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample_density(f, rng);
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        const double F = f.cdf(xs[i]);
        d = std::max({d, std::abs(F - static_cast<double>(i) / n), std::abs(F - static_cast<double>(i + 1) / n)});
    }
    EXPECT_LT(d, 1.63 / std::sqrt(n));  // KS critical value at alpha = 0.01
}

TEST(Discretize, MatchesQuadrature) {
    const LipschitzDensity f({0.0, 0.3, 0.7, 1.0}, {0.5, 1.15, 1.15, 0.8}, 3.0);
    for (std::uint64_t m : {1ULL, 7ULL, 64ULL}) {
        const auto p = discretize(f, m);
        double total = 0.0;
        for (std::uint64_t i = 0; i < m; ++i) {
            const double a = static_cast<double>(i) / m, b = static_cast<double>(i + 1) / m;
            EXPECT_NEAR(p[i], trapezoid(f, a, b, 1000000 / static_cast<int>(m)), 1e-6);
            total += p[i];
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(L1Continuous, MatchesQuadrature) {
    const LipschitzDensity f({0.0, 0.3, 0.7, 1.0}, {0.5, 1.15, 1.15, 0.8}, 3.0);
    const double oracle = trapezoid([&](double x) { return std::abs(f(x) - 1.0); }, 0.0, 1.0, 1000000);
    EXPECT_NEAR(l1_continuous_to_uniform(f), oracle, 1e-6);
    EXPECT_NEAR(l1_continuous_to_uniform(LipschitzDensity::uniform()), 0.0, 1e-15);
}

TEST(LowerBoundFamily, ResolveRoundsToEvenCells) {
    const auto spec = LowerBoundFamilySpec::resolve(4.0, 0.4, 0.25);
    EXPECT_EQ(spec.cells, 2u);
    EXPECT_DOUBLE_EQ(spec.delta_width, 0.5);
    EXPECT_DOUBLE_EQ(spec.distance(), 0.5);
    EXPECT_EQ(spec.bit_count(), 1u);

    // raw cell count 1/(4 * 1.1 * 0.01) = 22.7 -> 22
    const auto fine = LowerBoundFamilySpec::resolve(1.0, 0.01, 0.1);
    EXPECT_EQ(fine.cells, 22u);
    EXPECT_GE(fine.achieved_epsilon, 0.01);

    EXPECT_THROW(LowerBoundFamilySpec::resolve(1.0, 0.2, 0.1), std::domain_error);  // M < 2
    EXPECT_THROW(LowerBoundFamilySpec::resolve(1.0, 0.01, 0.0), std::domain_error);
}

TEST(LowerBoundFamily, DistanceIsLWidthOverFour) {
    Rng rng(21);
    for (int rep = 0; rep < 50; ++rep) {
        const auto spec = random_family(rng);
        const auto f = make_lower_bound_density(spec);
        EXPECT_NEAR(l1_continuous_to_uniform(f), spec.lipschitz_bound * spec.delta_width / 4.0, 1e-9);
        EXPECT_GE(spec.distance(), spec.epsilon * (1.0 - 1e-12));
        for (double v : f.values()) EXPECT_GE(v, 0.0);
    }
}

TEST(LowerBoundFamily, BitsFlipPairs) {
    const auto spec = LowerBoundFamilySpec::resolve(8.0, 0.2, 0.25).with_bits({1, -1, 1, -1});
    ASSERT_EQ(spec.cells, 8u);
    const auto f = make_lower_bound_density(spec);
    const double w = spec.delta_width;
    EXPECT_NEAR(f(0.5 * w), 1.0 + spec.peak_offset(), 1e-12);
    EXPECT_NEAR(f(1.5 * w), 1.0 - spec.peak_offset(), 1e-12);
    EXPECT_NEAR(f(2.5 * w), 1.0 - spec.peak_offset(), 1e-12);
    EXPECT_NEAR(f(3.5 * w), 1.0 + spec.peak_offset(), 1e-12);
    EXPECT_THROW(make_lower_bound_density(spec.with_bits({1, 1})), std::domain_error);
    EXPECT_THROW(make_lower_bound_density(spec.with_bits({1, 0, 1, 1})), std::domain_error);
}

TEST(BinningLoss, DiscretizationLosesAtMostLOverM) {
    Rng rng(31);
    for (int rep = 0; rep < 100; ++rep) {
        const auto spec = random_family(rng);
        const auto f = make_lower_bound_density(spec);
        const double gamma = l1_continuous_to_uniform(f);
        for (std::uint64_t m : {8ULL, 16ULL, 64ULL, 256ULL}) {
            const double binned = l1_to_uniform(discretize(f, m));
            EXPECT_GE(binned - (gamma - spec.lipschitz_bound / static_cast<double>(m)), -1e-9);
            if (static_cast<double>(m) >= spec.lipschitz_bound / (2.0 * gamma)) {
                EXPECT_GE(binned, gamma / 2.0 - 1e-9);
            }
        }
    }
}

TEST(BinningLoss, SmoothDensityNeverGainsDistance) {
    // Binning can only average away deviation from uniform.
    const LipschitzDensity f({0.0, 0.3, 0.7, 1.0}, {0.5, 1.15, 1.15, 0.8}, 3.0);
    const double gamma = l1_continuous_to_uniform(f);
    for (std::uint64_t m : {1ULL, 2ULL, 5ULL, 40ULL, 1000ULL})
        EXPECT_LE(l1_to_uniform(discretize(f, m)), gamma + 1e-12);
}
