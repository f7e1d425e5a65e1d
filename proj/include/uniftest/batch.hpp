// batch.hpp
//
// Fixed-sample-size coincidence test: draw n = ceil(C_n sqrt(m) / eps^2)
// samples once and reject uniformity iff c_u(n; m) - K1 > C_t n eps^2.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>

#include "uniftest/coincidence.hpp"
#include "uniftest/verdict.hpp"

namespace uniftest {

struct BatchConfig {
    std::uint64_t m = 0;
    double epsilon = 0.0;
    double sample_multiplier = 1.0;     // C_n
    double threshold_multiplier = 1.0;  // C_t

    void validate() const {
        if (m == 0) throw std::domain_error("m must be positive");
        if (!(epsilon > 0.0 && epsilon < 2.0)) throw std::domain_error("epsilon must lie in (0, 2)");
        if (!(sample_multiplier > 0.0) || !(threshold_multiplier > 0.0))
            throw std::domain_error("multipliers must be positive");
    }

    std::uint64_t sample_size() const {
        return static_cast<std::uint64_t>(
            std::ceil(sample_multiplier * std::sqrt(static_cast<double>(m)) / (epsilon * epsilon) - 1e-9));
    }

    /// Threshold per unit of C_t.
    double threshold_scale() const { return static_cast<double>(sample_size()) * epsilon * epsilon; }
    double threshold() const { return threshold_multiplier * threshold_scale(); }
};

struct BatchOutcome {
    Verdict verdict;
    std::uint64_t k1 = 0;
    double statistic = 0.0;  // c_u(n; m) - K1
};

template <class Source>
BatchOutcome batch_test_detailed(const BatchConfig& config, Source&& next) {
    config.validate();
    const std::uint64_t n = config.sample_size();
    CoincidenceState state(config.m);
    while (state.total() < n) {
        std::optional<Symbol> x = next();
        if (!x) throw TruncatedStream(state.total(), 1, n);
        state.insert(*x);
    }
    BatchOutcome out;
    out.k1 = state.k1();
    out.statistic = expected_k1_uniform(n, config.m) - static_cast<double>(out.k1);
    const bool h1 = rejects(out.statistic, config.threshold());
    out.verdict = Verdict{h1 ? Decision::H1 : Decision::H0, n,
                          h1 ? std::optional<std::uint64_t>{1} : std::nullopt};
    return out;
}

template <class Source>
Verdict batch_test(const BatchConfig& config, Source&& next) {
    return batch_test_detailed(config, std::forward<Source>(next)).verdict;
}

}  // namespace uniftest
