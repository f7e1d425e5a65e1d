// verdict.hpp
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace uniftest {

enum class Decision { H0, H1 };

inline std::string_view to_string(Decision d) { return d == Decision::H0 ? "H0" : "H1"; }

inline Decision decision_from_string(std::string_view s) {
    if (s == "H0") return Decision::H0;
    if (s == "H1") return Decision::H1;
    throw std::invalid_argument("unknown decision '" + std::string(s) + "'");
}

/// Outcome of one test run. exit_epoch is set iff the test rejected uniformity.
struct Verdict {
    Decision decision = Decision::H0;
    std::uint64_t samples_used = 0;
    std::optional<std::uint64_t> exit_epoch;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// One evaluated epoch: the comparison Z_k > tau_k made at n_k samples.
struct EpochRecord {
    std::uint64_t epoch = 0;
    std::uint64_t samples = 0;
    std::uint64_t bins = 0;
    std::uint64_t k1 = 0;
    double expected_k1 = 0.0;
    double statistic = 0.0;  // Z_k = expected_k1 - k1
    double threshold = 0.0;
    double threshold_scale = 0.0;  // tau_k / threshold multiplier
};

/// Strict comparison: a statistic equal to the threshold does not reject.
inline bool rejects(double statistic, double threshold) noexcept { return statistic > threshold; }

/// A sample source ran dry before the test reached a verdict.
class TruncatedStream : public std::runtime_error {
public:
    TruncatedStream(std::uint64_t samples_consumed, std::uint64_t epoch, std::uint64_t samples_needed)
        : std::runtime_error("sample stream exhausted after " + std::to_string(samples_consumed) +
                             " samples in epoch " + std::to_string(epoch) + " (epoch needs " +
                             std::to_string(samples_needed) + ")"),
          samples_consumed_(samples_consumed), epoch_(epoch), samples_needed_(samples_needed) {}

    std::uint64_t samples_consumed() const noexcept { return samples_consumed_; }
    std::uint64_t epoch() const noexcept { return epoch_; }
    std::uint64_t samples_needed() const noexcept { return samples_needed_; }

private:
    std::uint64_t samples_consumed_;
    std::uint64_t epoch_;
    std::uint64_t samples_needed_;
};

/// Stepping a test that already produced its verdict.
class TestFinished : public std::logic_error {
public:
    TestFinished() : std::logic_error("test already reached a verdict") {}
};

}  // namespace uniftest
