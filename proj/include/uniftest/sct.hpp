// sct.hpp
//
// Sequential coincidence test for uniformity of a distribution on m symbols.
//
// Epoch k ends when the cumulative sample count reaches
//     n_k = ceil(k * sqrt(m ln(k + 2/delta)))
// and rejects uniformity when
//     Z_k = c_u(n_k; m) - K1(S) > tau_k = C_t * n_k * sqrt(ln(k + 2/delta) / m).
// After kappa = ceil(C_kappa / eps^2) epochs without rejection the test
// accepts. Defaults C_t = 7, C_kappa = 112.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uniftest/coincidence.hpp"
#include "uniftest/verdict.hpp"

namespace uniftest {

/// ceil(multiplier / eps^2), ignoring rounding noise below 1e-9.
inline std::uint64_t epoch_budget(double multiplier, double epsilon) {
    return static_cast<std::uint64_t>(std::ceil(multiplier / (epsilon * epsilon) - 1e-9));
}

struct EpochPlan {
    std::uint64_t epoch = 0;
    std::uint64_t samples = 0;  // cumulative n_k
    double threshold = 0.0;     // tau_k
    double threshold_scale = 0.0;
    std::uint64_t bins = 0;     // m_k (m for SCT)
};

struct SctConfig {
    std::uint64_t m = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    double threshold_multiplier = 7.0;
    double kappa_multiplier = 112.0;
    /// Caps the epoch budget kappa when set.
    std::optional<std::uint64_t> max_epochs_override;

    void validate() const {
        if (m == 0) throw std::domain_error("m must be positive");
        if (!(epsilon > 0.0 && epsilon < 2.0)) throw std::domain_error("epsilon must lie in (0, 2)");
        if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0, 1)");
        if (!(threshold_multiplier > 0.0) || !(kappa_multiplier > 0.0))
            throw std::domain_error("multipliers must be positive");
        if (max_epochs_override && *max_epochs_override == 0)
            throw std::domain_error("epoch override must be positive");
    }

    std::uint64_t kappa() const {
        const std::uint64_t k = std::max<std::uint64_t>(epoch_budget(kappa_multiplier, epsilon), 1);
        return max_epochs_override ? std::min(k, *max_epochs_override) : k;
    }
};

inline EpochPlan sct_schedule(const SctConfig& config, std::uint64_t k) {
    if (k == 0 || k > config.kappa())
        throw std::domain_error("epoch " + std::to_string(k) + " outside [1, " + std::to_string(config.kappa()) + "]");
    const double log_term = std::log(static_cast<double>(k) + 2.0 / config.delta);
    const auto md = static_cast<double>(config.m);
    EpochPlan plan;
    plan.epoch = k;
    plan.samples = static_cast<std::uint64_t>(std::ceil(static_cast<double>(k) * std::sqrt(md * log_term)));
    plan.threshold_scale = static_cast<double>(plan.samples) * std::sqrt(log_term / md);
    plan.threshold = config.threshold_multiplier * plan.threshold_scale;
    plan.bins = config.m;
    return plan;
}

/// Streaming state of one SCT run.
class SequentialCoincidenceTest {
public:
    using Observer = std::function<void(const EpochRecord&)>;

    explicit SequentialCoincidenceTest(SctConfig config)
        : config_((config.validate(), std::move(config))), kappa_(config_.kappa()), state_(config_.m),
          plan_(sct_schedule(config_, 1)) {}

    void set_observer(Observer observer) { observer_ = std::move(observer); }

    /// Adds one sample. Returns the verdict once the test terminates.
    std::optional<Verdict> step(Symbol symbol) {
        if (verdict_) throw TestFinished();
        state_.insert(symbol);
        if (state_.total() < plan_.samples) return std::nullopt;

        EpochRecord record;
        record.epoch = plan_.epoch;
        record.samples = plan_.samples;
        record.bins = config_.m;
        record.k1 = state_.k1();
        record.expected_k1 = expected_k1_uniform(plan_.samples, config_.m);
        record.statistic = record.expected_k1 - static_cast<double>(record.k1);
        record.threshold = plan_.threshold;
        record.threshold_scale = plan_.threshold_scale;
        if (observer_) observer_(record);

        if (rejects(record.statistic, record.threshold)) {
            verdict_ = Verdict{Decision::H1, state_.total(), plan_.epoch};
        } else if (plan_.epoch == kappa_) {
            verdict_ = Verdict{Decision::H0, state_.total(), std::nullopt};
        } else {
            plan_ = sct_schedule(config_, plan_.epoch + 1);
        }
        return verdict_;
    }

    bool finished() const noexcept { return verdict_.has_value(); }
    const std::optional<Verdict>& verdict() const noexcept { return verdict_; }
    const SctConfig& config() const noexcept { return config_; }
    const EpochPlan& plan() const noexcept { return plan_; }
    std::uint64_t kappa() const noexcept { return kappa_; }
    const CoincidenceState& state() const noexcept { return state_; }

private:
    SctConfig config_;
    std::uint64_t kappa_;
    CoincidenceState state_;
    EpochPlan plan_;
    std::optional<Verdict> verdict_;
    Observer observer_;
};

/// Drives an SCT to its verdict. `next` returns std::optional<Symbol>; an
/// empty optional before the verdict raises TruncatedStream.
template <class Source>
Verdict sct_run(const SctConfig& config, Source&& next, SequentialCoincidenceTest::Observer observer = {}) {
    SequentialCoincidenceTest test(config);
    if (observer) test.set_observer(std::move(observer));
    for (;;) {
        std::optional<Symbol> x = next();
        if (!x) throw TruncatedStream(test.state().total(), test.plan().epoch, test.plan().samples);
        if (auto v = test.step(*x)) return *v;
    }
}

/// Smallest l >= 1 with 1123 l^(1/4) exp(-sqrt(l)/4) <= delta eps^2.
///
/// The left side rises on [1, 4] and falls afterwards, and it exceeds 874 on
/// [1, 4], so doubling from 4 and bisecting finds the first crossing.
inline std::uint64_t compute_m0(double epsilon, double delta) {
    if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0))
        throw std::domain_error("compute_m0 expects epsilon and delta in (0, 1)");
    const double rhs = delta * epsilon * epsilon;
    auto satisfied = [rhs](std::uint64_t l) {
        const auto x = static_cast<double>(l);
        return 1123.0 * std::pow(x, 0.25) * std::exp(-0.25 * std::sqrt(x)) <= rhs;
    };
    std::uint64_t lo = 4, hi = 8;
    while (!satisfied(hi)) {
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        (satisfied(mid) ? hi : lo) = mid;
    }
    return hi;
}

/// Regime checks behind the error guarantee. Advisory only.
inline std::vector<std::string> sct_validate_regime(const SctConfig& config) {
    std::vector<std::string> warnings;
    if (config.epsilon < 1.0 && config.delta > 0.0 && config.delta < 1.0) {
        const std::uint64_t m0 = compute_m0(config.epsilon, config.delta);
        if (config.m < m0)
            warnings.push_back("m below m0: m = " + std::to_string(config.m) + " < m0 = " + std::to_string(m0));
    }
    const std::uint64_t n_kappa = sct_schedule(config, config.kappa()).samples;
    const double ratio = static_cast<double>(n_kappa) / static_cast<double>(config.m);
    const double sparse_cap = config.epsilon * config.epsilon / 1536.0;
    if (ratio > sparse_cap)
        warnings.push_back("sparse regime violated: n_kappa/m = " + std::to_string(ratio) + " > eps^2/1536 = " +
                           std::to_string(sparse_cap));
    const double eps_floor = std::pow(static_cast<double>(config.m), -0.125);
    if (config.epsilon < eps_floor)
        warnings.push_back("epsilon below m^(-1/8) = " + std::to_string(eps_floor));
    return warnings;
}

}  // namespace uniftest
