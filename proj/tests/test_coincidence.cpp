#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "uniftest/coincidence.hpp"
#include "uniftest/distributions.hpp"
#include "uniftest/random.hpp"

using namespace uniftest;

namespace {

DiscreteDistribution random_pmf(std::uint64_t m, Rng& rng) {
    std::vector<double> w(m);
    double total = 0.0;
    for (auto& x : w) total += (x = rng.uniform01() + 1e-3);
    for (auto& x : w) x /= total;
    // absorb rounding into the last entry
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) s += w[i];
    w.back() = 1.0 - s;
    return DiscreteDistribution(w);
}

// E[K1] by summing over all m^n sequences.
double enumerate_k1(const DiscreteDistribution& p, std::uint64_t n) {
    const std::uint64_t m = p.support_size();
    std::vector<std::uint64_t> seq(n, 0);
    double expectation = 0.0;
    for (;;) {
        double prob = 1.0;
        std::map<std::uint64_t, int> counts;
        for (auto s : seq) {
            prob *= p[s];
            ++counts[s];
        }
        int k1 = 0;
        for (const auto& [sym, c] : counts) k1 += c == 1;
        expectation += prob * k1;
        std::size_t i = 0;
        while (i < n && ++seq[i] == m) seq[i++] = 0;
        if (i == n) break;
    }
    return expectation;
}

}  // namespace

TEST(CoincidenceState, TracksSingletons) {
    CoincidenceState s(10);
    s.insert(3);
    EXPECT_EQ(s.k1(), 1u);
    s.insert(4);
    EXPECT_EQ(s.k1(), 2u);
    s.insert(3);
    EXPECT_EQ(s.k1(), 1u);
    s.insert(3);
    EXPECT_EQ(s.k1(), 1u);
    EXPECT_EQ(s.total(), 4u);
    EXPECT_EQ(s.count(3), 3u);
    EXPECT_EQ(s.count(9), 0u);
}

TEST(CoincidenceState, RejectsOutOfRangeSymbol) {
    CoincidenceState s(5);
    EXPECT_THROW(s.insert(5), std::out_of_range);
    EXPECT_EQ(s.total(), 0u);
}

TEST(CoincidenceState, ZeroSupportRejected) { EXPECT_THROW(CoincidenceState(0), std::domain_error); }

TEST(CoincidenceState, IncrementalMatchesRecount) {
    Rng rng(11);
    for (int rep = 0; rep < 10000; ++rep) {
        const std::uint64_t m = 1 + rng.below(50);
        const std::uint64_t n = rng.below(80);
        CoincidenceState s(m);
        std::vector<Symbol> seq;
        for (std::uint64_t i = 0; i < n; ++i) {
            const Symbol x = rng.below(m);
            seq.push_back(x);
            s.insert(x);
        }
        ASSERT_EQ(s.k1(), s.rescan_k1());
        ASSERT_EQ(s.k1(), k1_of(seq, m));
    }
}

TEST(CoincidenceState, SparseStorageAboveDenseLimit) {
    const std::uint64_t m = CoincidenceState::kDenseLimit * 4;
    CoincidenceState s(m);
    std::vector<Symbol> seq{m - 1, 0, m - 1, 12345678901ULL % m, 7};
    for (auto x : seq) s.insert(x);
    EXPECT_EQ(s.k1(), 3u);
    EXPECT_EQ(s.k1(), s.rescan_k1());
    EXPECT_EQ(s.k1(), k1_of(seq, m));
}

TEST(K1Of, EmptyAndAllEqual) {
    EXPECT_EQ(k1_of({}, 4), 0u);
    const std::vector<Symbol> same(10, 2);
    EXPECT_EQ(k1_of(same, 4), 0u);
    const std::vector<Symbol> one{2};
    EXPECT_EQ(k1_of(one, 4), 1u);
    const std::vector<Symbol> bad{4};
    EXPECT_THROW(k1_of(bad, 4), std::out_of_range);
}

TEST(ExpectedK1Uniform, EdgeCases) {
    EXPECT_EQ(expected_k1_uniform(0, 10), 0.0);
    EXPECT_EQ(expected_k1_uniform(1, 10), 1.0);
    EXPECT_EQ(expected_k1_uniform(5, 1), 0.0);
    EXPECT_DOUBLE_EQ(expected_k1_uniform(2, 2), 1.0);
}

TEST(ExpectedK1Uniform, MatchesClosedForm) {
    for (std::uint64_t m : {2ULL, 7ULL, 200ULL, 20000ULL})
        for (std::uint64_t n : {2ULL, 3ULL, 10ULL, 150ULL}) {
            const double closed = static_cast<double>(n) * std::pow(1.0 - 1.0 / m, static_cast<double>(n - 1));
            EXPECT_NEAR(expected_k1_uniform(n, m), closed, 1e-12 * closed) << n << ' ' << m;
        }
}

TEST(ExpectedK1Uniform, StableForHugeSupport) {
    const std::uint64_t m = std::uint64_t{1} << 60;
    const double v = expected_k1_uniform(1000, m);
    EXPECT_LT(v, 1000.0);
    EXPECT_NEAR(v, 1000.0 - 999000.0 / std::ldexp(1.0, 60), 1e-9);
}

TEST(ExpectedK1Uniform, Sandwich) {
    for (std::uint64_t m : {200ULL, 2000ULL, 20000ULL})
        for (std::uint64_t n = 1; n <= 200 && n <= m; ++n) {
            const double nd = static_cast<double>(n), md = static_cast<double>(m);
            const double upper = nd * (nd - 1.0) / md;
            const double lower = upper - nd / 2.0 * ((nd - 1.0) / md) * ((nd - 1.0) / md);
            const double gap = nd - expected_k1_uniform(n, m);
            EXPECT_LE(lower, gap + 1e-9);
            EXPECT_LE(gap, upper + 1e-9);
        }
}

TEST(ExpectedK1, MatchesEnumeration) {
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const std::uint64_t m = 1 + rng.below(5);
        const auto p = random_pmf(m, rng);
        for (std::uint64_t n = 0; n <= 6; ++n)
            ASSERT_NEAR(expected_k1(p, n), enumerate_k1(p, n), 1e-12) << "m=" << m << " n=" << n;
    }
}

TEST(ExpectedK1, UniformAgreesWithSpecialisedFormula) {
    for (std::uint64_t m : {3ULL, 50ULL, 1000ULL}) {
        const auto u = make_uniform(m);
        for (std::uint64_t n : {1ULL, 2ULL, 17ULL, 400ULL})
            EXPECT_NEAR(expected_k1(u, n), expected_k1_uniform(n, m), 1e-9 * n);
    }
}

TEST(ExpectedK1, MonteCarloMean) {
    Rng rng(99);
    const std::uint64_t m = 40, n = 30;
    const auto p = make_perturbed(m, 0.5);
    const int trials = 100000;
    double sum = 0.0, sq = 0.0;
    for (int t = 0; t < trials; ++t) {
        CoincidenceState s(m);
        for (std::uint64_t i = 0; i < n; ++i) s.insert(sample_discrete(p, rng));
        const auto k = static_cast<double>(s.k1());
        sum += k;
        sq += k * k;
    }
    const double mean = sum / trials;
    const double se = std::sqrt((sq / trials - mean * mean) / trials);
    EXPECT_NEAR(mean, expected_k1(p, n), 4.0 * se);
}

TEST(ExpectedK1, UniformMaximisesAmongSupportSizeM) {
    Rng rng(8);
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = random_pmf(20, rng);
        EXPECT_LE(expected_k1(p, 15), expected_k1_uniform(15, 20) + 1e-12);
    }
}

TEST(BinOf, Boundaries) {
    EXPECT_EQ(bin_of(0.0, 4).value, 0u);
    EXPECT_EQ(bin_of(0.25, 4).value, 1u);
    EXPECT_EQ(bin_of(0.2499999, 4).value, 0u);
    EXPECT_EQ(bin_of(1.0, 4).value, 3u);
    EXPECT_THROW(bin_of(-0.1, 4), std::domain_error);
    EXPECT_THROW(bin_of(1.5, 4), std::domain_error);
    EXPECT_THROW(bin_of(std::numeric_limits<double>::quiet_NaN(), 4), std::domain_error);
}

TEST(L1ToUniform, KnownValues) {
    EXPECT_NEAR(l1_to_uniform(make_uniform(10)), 0.0, 1e-15);
    EXPECT_NEAR(l1_to_uniform(make_perturbed(10, 0.4)), 0.4, 1e-12);
    EXPECT_NEAR(l1_to_uniform(DiscreteDistribution({1.0, 0.0})), 1.0, 1e-15);
}
