// discrete_distribution.hpp
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace uniftest {

/// A pmf over symbols {0, ..., m-1} with a cached cumulative sum.
///
/// Construction validates the pmf: entries must be finite and nonnegative and
/// the total must be 1 within 1e-12.
class DiscreteDistribution {
public:
    static constexpr double kMassTolerance = 1e-12;

    explicit DiscreteDistribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {
        if (pmf_.empty()) throw std::domain_error("pmf must have at least one symbol");
        cdf_.resize(pmf_.size());
        // Neumaier summation keeps the cdf tail within a few ulps of the exact sum.
        double sum = 0.0, carry = 0.0;
        for (std::size_t i = 0; i < pmf_.size(); ++i) {
            const double p = pmf_[i];
            if (!std::isfinite(p) || p < 0.0)
                throw std::domain_error("pmf entry " + std::to_string(i) + " is negative or not finite");
            const double t = sum + p;
            carry += std::abs(sum) >= p ? (sum - t) + p : (p - t) + sum;
            sum = t;
            cdf_[i] = sum + carry;
        }
        if (std::abs(cdf_.back() - 1.0) > kMassTolerance)
            throw std::domain_error("pmf sums to " + std::to_string(cdf_.back()) + ", expected 1");
    }

    std::size_t support_size() const noexcept { return pmf_.size(); }
    std::span<const double> pmf() const noexcept { return pmf_; }
    std::span<const double> cdf() const noexcept { return cdf_; }
    double operator[](std::size_t i) const { return pmf_[i]; }

private:
    std::vector<double> pmf_;
    std::vector<double> cdf_;
};

}  // namespace uniftest
