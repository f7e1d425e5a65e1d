// stats.hpp
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace uniftest::harness {

struct Summary {
    std::uint64_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n - 1)
    double stderr_mean = 0.0;
};

/// Two-pass mean and sample standard deviation; summation runs in input order
/// so identical inputs give bit-identical results.
inline Summary summarize(std::span<const double> xs) {
    Summary s;
    s.count = xs.size();
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        s.stderr_mean = s.stddev / std::sqrt(static_cast<double>(xs.size()));
    }
    return s;
}

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

/// Wilson score interval for a binomial proportion; z = 1.959963984540054 gives 95%.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054) {
    if (successes > trials) throw std::domain_error("successes exceed trials");
    if (trials == 0) return {0.0, 1.0};
    const auto n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace uniftest::harness
