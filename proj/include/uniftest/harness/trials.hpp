// trials.hpp
//
// Monte Carlo trials: per-trial records, single-trial runners for every
// engine, and the trials.csv format.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uniftest/abc.hpp"
#include "uniftest/batch.hpp"
#include "uniftest/fixtures.hpp"
#include "uniftest/harness/parallel.hpp"
#include "uniftest/random.hpp"
#include "uniftest/sct.hpp"
#include "uniftest/verdict.hpp"

namespace uniftest::harness {

struct TrialRecord {
    std::uint64_t cell = 0;
    std::uint64_t trial = 0;
    std::uint64_t trial_seed = 0;
    std::string algorithm;  // sct | abc | batch
    std::string source;
    double gamma = 0.0;     // l1 distance of the source to uniform
    Decision truth = Decision::H0;
    Verdict verdict;
    double wall_time_seconds = 0.0;  // not serialized; see timing.json

    bool correct() const noexcept { return verdict.decision == truth; }
};

inline Decision truth_for(double gamma) { return gamma > 0.0 ? Decision::H1 : Decision::H0; }

inline Verdict run_sct_trial(const SctConfig& config, const DiscreteSource& source, std::uint64_t seed) {
    Rng rng(seed);
    return sct_run(config, [&]() -> std::optional<Symbol> { return source.draw(rng); });
}

inline Verdict run_batch_trial(const BatchConfig& config, const DiscreteSource& source, std::uint64_t seed) {
    Rng rng(seed);
    return batch_test(config, [&]() -> std::optional<Symbol> { return source.draw(rng); });
}

inline Verdict run_abc_trial(const AbcConfig& config, const ContinuousSource& source, std::uint64_t seed) {
    Rng rng(seed);
    return abc_run(config, [&]() -> std::optional<double> { return source.draw(rng); });
}

/// One (algorithm, source) combination of an experiment.
struct Cell {
    std::uint64_t id = 0;
    std::string algorithm;
    std::string source;
    double gamma = 0.0;
    std::function<Verdict(std::uint64_t seed)> run;
};

inline std::vector<TrialRecord> run_cell(const Cell& cell, std::uint64_t trials, std::uint64_t master_seed) {
    return parallel_map(trials, [&](std::size_t t) {
        TrialRecord r;
        r.cell = cell.id;
        r.trial = t;
        r.trial_seed = trial_seed(master_seed, cell.id, t);
        r.algorithm = cell.algorithm;
        r.source = cell.source;
        r.gamma = cell.gamma;
        r.truth = truth_for(cell.gamma);
        const auto start = std::chrono::steady_clock::now();
        r.verdict = cell.run(r.trial_seed);
        r.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return r;
    });
}

// ---------------------------------------------------------------------------
// trials.csv
// ---------------------------------------------------------------------------

inline constexpr const char* kTrialsHeader =
    "cell,trial,trial_seed,algorithm,source,gamma,truth,decision,samples_used,exit_epoch";

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
    char buf[40];
    if (x == std::floor(x) && std::abs(x) < 1e15) {
        std::snprintf(buf, sizeof buf, "%.0f", x);
        return buf;
    }
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        if (std::stod(buf) == x) break;
    }
    return buf;
}

inline void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
    out << kTrialsHeader << '\n';
    for (const auto& r : records) {
        if (r.source.find(',') != std::string::npos || r.algorithm.find(',') != std::string::npos)
            throw std::invalid_argument("labels must not contain commas");
        out << r.cell << ',' << r.trial << ',' << r.trial_seed << ',' << r.algorithm << ',' << r.source << ','
            << format_double(r.gamma) << ',' << to_string(r.truth) << ',' << to_string(r.verdict.decision) << ','
            << r.verdict.samples_used << ',';
        if (r.verdict.exit_epoch) out << *r.verdict.exit_epoch;
        out << '\n';
    }
}

inline std::vector<TrialRecord> read_trials_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kTrialsHeader) throw std::runtime_error("unexpected trials.csv header");
    std::vector<TrialRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() == 9 && !line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 10) throw std::runtime_error("malformed trials.csv row: " + line);
        TrialRecord r;
        r.cell = std::stoull(f[0]);
        r.trial = std::stoull(f[1]);
        r.trial_seed = std::stoull(f[2]);
        r.algorithm = f[3];
        r.source = f[4];
        r.gamma = std::stod(f[5]);
        r.truth = decision_from_string(f[6]);
        r.verdict.decision = decision_from_string(f[7]);
        r.verdict.samples_used = std::stoull(f[8]);
        if (!f[9].empty()) r.verdict.exit_epoch = std::stoull(f[9]);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace uniftest::harness
