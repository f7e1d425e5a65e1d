// abc.hpp
//
// Adaptive binning coincidence test for uniformity of an L-Lipschitz density
// on [0,1]. Epoch k uses
//     m_k = ceil(c0 k^4 ln(k + 2/delta))          bins,
//     n_k = ceil(sqrt(c0) k^3 ln(k + 2/delta))    cumulative samples,
//     tau_k = C_t n_k sqrt(ln(k + 2/delta) / m_k),
// and recomputes K1 over every retained sample binned at resolution m_k.
// kappa = ceil(C_kappa / eps^2); defaults C_t = 9, C_kappa = 576 and
// c0 = max{28212, m0(eps, delta), 2L}.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uniftest/coincidence.hpp"
#include "uniftest/sct.hpp"
#include "uniftest/verdict.hpp"

namespace uniftest {

struct AbcConfig {
    double epsilon = 0.0;
    double delta = 0.0;
    double lipschitz_bound = 1.0;
    std::optional<double> c0;  // empty: max(28212, m0, 2L)
    double threshold_multiplier = 9.0;
    double kappa_multiplier = 576.0;
    std::optional<std::uint64_t> max_epochs_override;  // caps kappa
    /// Reduced-constant mode lifts the c0 >= 2L requirement so small
    /// constants can be used for desk-scale runs.
    bool reduced = false;

    static constexpr double kDefaultC0Floor = 28212.0;

    double default_c0() const {
        double c = std::max(kDefaultC0Floor, 2.0 * lipschitz_bound);
        if (epsilon < 1.0) c = std::max(c, static_cast<double>(compute_m0(epsilon, delta)));
        return c;
    }

    double resolved_c0() const { return c0 ? *c0 : default_c0(); }

    void validate() const {
        if (!(epsilon > 0.0 && epsilon < 2.0)) throw std::domain_error("epsilon must lie in (0, 2)");
        if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0, 1)");
        if (!(lipschitz_bound > 0.0)) throw std::domain_error("Lipschitz bound must be positive");
        if (!(threshold_multiplier > 0.0) || !(kappa_multiplier > 0.0))
            throw std::domain_error("multipliers must be positive");
        const double c = resolved_c0();
        if (!(c > 0.0)) throw std::domain_error("c0 must be positive");
        if (!reduced && c < 2.0 * lipschitz_bound)
            throw std::domain_error("c0 must be at least 2L outside reduced-constant mode");
        if (max_epochs_override && *max_epochs_override == 0)
            throw std::domain_error("epoch override must be positive");
    }

    std::uint64_t kappa() const {
        const std::uint64_t k = std::max<std::uint64_t>(epoch_budget(kappa_multiplier, epsilon), 1);
        return max_epochs_override ? std::min(k, *max_epochs_override) : k;
    }
};

namespace detail {

inline std::uint64_t checked_ceil(double x, const char* what) {
    if (!(x < 0x1.0p63)) throw std::overflow_error(std::string(what) + " exceeds the 64-bit range");
    return static_cast<std::uint64_t>(std::ceil(x));
}

}  // namespace detail

inline EpochPlan abc_schedule(const AbcConfig& config, std::uint64_t k) {
    if (k == 0 || k > config.kappa())
        throw std::domain_error("epoch " + std::to_string(k) + " outside [1, " + std::to_string(config.kappa()) + "]");
    const double c0 = config.resolved_c0();
    const auto kd = static_cast<double>(k);
    const double log_term = std::log(kd + 2.0 / config.delta);
    EpochPlan plan;
    plan.epoch = k;
    plan.bins = detail::checked_ceil(c0 * kd * kd * kd * kd * log_term, "m_k");
    plan.samples = detail::checked_ceil(std::sqrt(c0) * kd * kd * kd * log_term, "n_k");
    plan.threshold_scale = static_cast<double>(plan.samples) * std::sqrt(log_term / static_cast<double>(plan.bins));
    plan.threshold = config.threshold_multiplier * plan.threshold_scale;
    return plan;
}

/// K1 of the samples binned into m equal cells of [0,1].
inline std::uint64_t k1_binned(std::span<const double> samples, std::uint64_t m) {
    std::vector<Symbol> labels;
    labels.reserve(samples.size());
    for (double x : samples) labels.push_back(bin_of(x, m).value);
    return k1_of(labels, m);
}

/// Streaming state of one ABC run. All raw samples are retained because each
/// epoch rebins the full sample set at a finer resolution.
class AdaptiveBinningTest {
public:
    using Observer = std::function<void(const EpochRecord&)>;

    explicit AdaptiveBinningTest(AbcConfig config)
        : config_((config.validate(), std::move(config))), kappa_(config_.kappa()),
          plan_(abc_schedule(config_, 1)) {}

    void set_observer(Observer observer) { observer_ = std::move(observer); }

    std::optional<Verdict> step(double sample) {
        if (verdict_) throw TestFinished();
        if (!(sample >= 0.0 && sample <= 1.0)) throw std::domain_error("sample outside [0,1]");
        raw_.push_back(sample);
        if (raw_.size() < plan_.samples) return std::nullopt;

        EpochRecord record;
        record.epoch = plan_.epoch;
        record.samples = plan_.samples;
        record.bins = plan_.bins;
        record.k1 = k1_binned(raw_, plan_.bins);
        record.expected_k1 = expected_k1_uniform(plan_.samples, plan_.bins);
        record.statistic = record.expected_k1 - static_cast<double>(record.k1);
        record.threshold = plan_.threshold;
        record.threshold_scale = plan_.threshold_scale;
        if (observer_) observer_(record);

        const auto used = static_cast<std::uint64_t>(raw_.size());
        if (rejects(record.statistic, record.threshold)) {
            verdict_ = Verdict{Decision::H1, used, plan_.epoch};
        } else if (plan_.epoch == kappa_) {
            verdict_ = Verdict{Decision::H0, used, std::nullopt};
        } else {
            plan_ = abc_schedule(config_, plan_.epoch + 1);
        }
        return verdict_;
    }

    bool finished() const noexcept { return verdict_.has_value(); }
    const std::optional<Verdict>& verdict() const noexcept { return verdict_; }
    const AbcConfig& config() const noexcept { return config_; }
    const EpochPlan& plan() const noexcept { return plan_; }
    std::uint64_t kappa() const noexcept { return kappa_; }
    std::span<const double> raw_samples() const noexcept { return raw_; }

private:
    AbcConfig config_;
    std::uint64_t kappa_;
    EpochPlan plan_;
    std::vector<double> raw_;
    std::optional<Verdict> verdict_;
    Observer observer_;
};

template <class Source>
Verdict abc_run(const AbcConfig& config, Source&& next, AdaptiveBinningTest::Observer observer = {}) {
    AdaptiveBinningTest test(config);
    if (observer) test.set_observer(std::move(observer));
    for (;;) {
        std::optional<double> x = next();
        if (!x) throw TruncatedStream(test.raw_samples().size(), test.plan().epoch, test.plan().samples);
        if (auto v = test.step(*x)) return *v;
    }
}

/// Conservative exit-epoch prediction for an alternative at continuous l1
/// distance gamma: the smallest k with k >= 144 / (gamma - L/m_k)^2, using
/// the discretization bound gamma - L/m_k in place of the binned distance.
/// Clamped to kappa when no epoch within budget qualifies. m_k is taken as a
/// real number here, so epochs whose bin count overflows 64 bits still count.
inline std::uint64_t abc_predict_exit_epoch(double gamma, const AbcConfig& config) {
    if (!(gamma > 0.0)) throw std::domain_error("gamma must be positive");
    config.validate();
    const std::uint64_t kappa = config.kappa();
    const double c0 = config.resolved_c0();
    for (std::uint64_t k = 1; k <= kappa; ++k) {
        const auto kd = static_cast<double>(k);
        const double bins = std::ceil(c0 * kd * kd * kd * kd * std::log(kd + 2.0 / config.delta));
        const double binned = gamma - config.lipschitz_bound / bins;
        if (binned > 0.0 && static_cast<double>(k) >= 144.0 / (binned * binned)) return k;
    }
    return kappa;
}

/// n_kappa as a real number (may exceed any feasible sample budget).
inline double abc_worst_case_samples(const AbcConfig& config) {
    const double kd = static_cast<double>(config.kappa());
    return std::ceil(std::sqrt(config.resolved_c0()) * kd * kd * kd * std::log(kd + 2.0 / config.delta));
}

}  // namespace uniftest
