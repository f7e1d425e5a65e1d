// coincidence.hpp
//
// The coincidence statistic K1 (number of symbols seen exactly once), its
// expectation, uniform binning of [0,1] and l1 distance of a pmf to uniform.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "uniftest/discrete_distribution.hpp"

namespace uniftest {

using Symbol = std::uint64_t;

/// Bin label in [0, m).
struct BinIndex {
    std::uint64_t value = 0;
    friend bool operator==(BinIndex, BinIndex) = default;
};

/// Streaming per-symbol counts with the running K1.
///
/// Small supports use a dense count array; supports above kDenseLimit switch
/// to a hash map so that sparse sampling at huge m stays cheap in memory.
class CoincidenceState {
public:
    static constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 24;

    explicit CoincidenceState(std::uint64_t support_size) : m_(support_size) {
        if (m_ == 0) throw std::domain_error("support size must be positive");
        if (m_ <= kDenseLimit) dense_.assign(m_, 0);
    }

    void insert(Symbol symbol) {
        if (symbol >= m_)
            throw std::out_of_range("symbol " + std::to_string(symbol) + " outside support of size " +
                                    std::to_string(m_));
        const std::uint64_t c = ++slot(symbol);
        if (c == 1) {
            ++k1_;
        } else if (c == 2) {
            --k1_;
        }
        ++total_;
    }

    std::uint64_t support_size() const noexcept { return m_; }
    std::uint64_t total() const noexcept { return total_; }
    std::uint64_t k1() const noexcept { return k1_; }

    std::uint64_t count(Symbol symbol) const {
        if (symbol >= m_) return 0;
        if (!dense_.empty()) return dense_[symbol];
        const auto it = sparse_.find(symbol);
        return it == sparse_.end() ? 0 : it->second;
    }

    /// Recomputes K1 by a full scan of the counts.
    std::uint64_t rescan_k1() const {
        if (!dense_.empty())
            return static_cast<std::uint64_t>(std::count(dense_.begin(), dense_.end(), 1U));
        return static_cast<std::uint64_t>(
            std::count_if(sparse_.begin(), sparse_.end(), [](const auto& kv) { return kv.second == 1; }));
    }

private:
    std::uint32_t& slot(Symbol symbol) {
        if (!dense_.empty()) return dense_[symbol];
        return sparse_[symbol];
    }

    std::uint64_t m_;
    std::uint64_t total_ = 0;
    std::uint64_t k1_ = 0;
    std::vector<std::uint32_t> dense_;
    std::unordered_map<Symbol, std::uint32_t> sparse_;
};

/// K1 of a sample set by histogram. Sorting keeps this independent of the
/// support size, so it is also used for rebinning at very fine resolutions.
inline std::uint64_t k1_of(std::span<const Symbol> samples, std::uint64_t m) {
    std::vector<Symbol> sorted(samples.begin(), samples.end());
    for (Symbol s : sorted)
        if (s >= m) throw std::out_of_range("symbol " + std::to_string(s) + " outside support");
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t singles = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        if (j - i == 1) ++singles;
        i = j;
    }
    return singles;
}

namespace detail {

// n * p * (1 - p)^(n - 1), evaluated in log space.
inline double singleton_mass(double n, double p) {
    if (n <= 0.0 || p <= 0.0) return 0.0;
    if (n == 1.0) return p;
    if (p >= 1.0) return 0.0;
    return n * p * std::exp((n - 1.0) * std::log1p(-p));
}

}  // namespace detail

/// c_u(n; m) = n (1 - 1/m)^(n-1), the exact mean of K1 over n uniform draws.
inline double expected_k1_uniform(std::uint64_t n, std::uint64_t m) {
    if (m == 0) throw std::domain_error("support size must be positive");
    if (n == 0) return 0.0;
    if (n == 1) return 1.0;
    if (m == 1) return 0.0;
    const double nd = static_cast<double>(n);
    return nd * std::exp((nd - 1.0) * std::log1p(-1.0 / static_cast<double>(m)));
}

/// Exact mean of K1 over n i.i.d. draws from p: sum_j n p_j (1 - p_j)^(n-1).
inline double expected_k1(const DiscreteDistribution& p, std::uint64_t n) {
    const double nd = static_cast<double>(n);
    double total = 0.0;
    for (double pj : p.pmf()) total += detail::singleton_mass(nd, pj);
    return total;
}

/// Half-open bins [i/m, (i+1)/m); x = 1 is clamped into the last bin.
inline BinIndex bin_of(double x, std::uint64_t m) {
    if (m == 0) throw std::domain_error("bin count must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("sample outside [0,1]");
    const auto md = static_cast<double>(m);
    auto b = static_cast<std::uint64_t>(std::floor(x * md));
    return BinIndex{std::min(b, m - 1)};
}

inline double l1_to_uniform(const DiscreteDistribution& p) {
    const double u = 1.0 / static_cast<double>(p.support_size());
    double total = 0.0;
    for (double pj : p.pmf()) total += std::abs(pj - u);
    return total;
}

}  // namespace uniftest
