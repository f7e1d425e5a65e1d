// random.hpp
//
// Seeded random streams for Monte Carlo trials.
//
// Every trial owns one Rng. Its seed is derived from a master seed, a cell id
// (one cell per algorithm/source combination in an experiment) and the trial
// index:
//
//   trial_seed(master, cell, trial) =
//       splitmix64(splitmix64(master ^ (cell * 0xD1B54A32D192ED03)) + trial)
//
// The derivation is part of the on-disk contract (seeds are written to
// trials.csv) and must not change between releases.
#pragma once

#include <cstdint>
#include <random>

namespace uniftest {

/// One step of the splitmix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t trial_seed(std::uint64_t master, std::uint64_t cell,
                                   std::uint64_t trial) noexcept {
    return splitmix64(splitmix64(master ^ (cell * 0xD1B54A32D192ED03ULL)) + trial);
}

/// mt19937_64 with platform-independent conversions to doubles and bounded
/// integers (the <random> distributions are implementation-defined).
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) {
        unsigned __int128 product = static_cast<unsigned __int128>(engine_()) * bound;
        auto low = static_cast<std::uint64_t>(product);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                product = static_cast<unsigned __int128>(engine_()) * bound;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace uniftest
