// report.hpp
//
// Per-cell aggregates of trial records. Everything in a cell aggregate is a
// function of the trial records alone, so re-reading trials.csv and calling
// aggregate() reproduces the report numbers exactly.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "uniftest/harness/stats.hpp"
#include "uniftest/harness/trials.hpp"

namespace uniftest::harness {

inline constexpr const char* kReportSchema = "uniftest.report/1";

struct CellAggregate {
    std::uint64_t cell = 0;
    std::string algorithm;
    std::string source;
    double gamma = 0.0;
    Decision truth = Decision::H0;
    std::uint64_t trials = 0;
    std::uint64_t correct = 0;
    Summary samples;
    double accuracy = 0.0;
    Interval error_interval;  // Wilson 95% on the error rate
    std::map<std::string, std::uint64_t> exit_epochs;  // "none" for H0 verdicts

    double error_rate() const {
        return trials ? static_cast<double>(trials - correct) / static_cast<double>(trials) : 0.0;
    }
};

inline std::vector<CellAggregate> aggregate(std::vector<TrialRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const TrialRecord& a, const TrialRecord& b) { return std::tie(a.cell, a.trial) < std::tie(b.cell, b.trial); });
    std::vector<CellAggregate> cells;
    for (std::size_t i = 0; i < records.size();) {
        std::size_t j = i;
        CellAggregate c;
        c.cell = records[i].cell;
        c.algorithm = records[i].algorithm;
        c.source = records[i].source;
        c.gamma = records[i].gamma;
        c.truth = records[i].truth;
        std::vector<double> samples;
        for (; j < records.size() && records[j].cell == c.cell; ++j) {
            const auto& r = records[j];
            samples.push_back(static_cast<double>(r.verdict.samples_used));
            c.correct += r.correct();
            ++c.exit_epochs[r.verdict.exit_epoch ? std::to_string(*r.verdict.exit_epoch) : "none"];
        }
        c.trials = j - i;
        c.samples = summarize(samples);
        c.accuracy = static_cast<double>(c.correct) / static_cast<double>(c.trials);
        c.error_interval = wilson_interval(c.trials - c.correct, c.trials);
        cells.push_back(std::move(c));
        i = j;
    }
    return cells;
}

inline nlohmann::json to_json(const CellAggregate& c) {
    return nlohmann::json{{"cell", c.cell},
                          {"algorithm", c.algorithm},
                          {"source", c.source},
                          {"gamma", c.gamma},
                          {"truth", std::string(to_string(c.truth))},
                          {"trials", c.trials},
                          {"correct", c.correct},
                          {"accuracy", c.accuracy},
                          {"error_rate", c.error_rate()},
                          {"error_wilson95", {c.error_interval.low, c.error_interval.high}},
                          {"mean_samples", c.samples.mean},
                          {"stddev_samples", c.samples.stddev},
                          {"stderr_samples", c.samples.stderr_mean},
                          {"exit_epochs", c.exit_epochs}};
}

inline nlohmann::json cells_to_json(const std::vector<CellAggregate>& cells) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : cells) arr.push_back(to_json(c));
    return arr;
}

/// Error-cap audit line for one cell: flagged when even the lower Wilson
/// bound of the error rate exceeds delta.
struct AuditCell {
    std::uint64_t cell = 0;
    std::string algorithm;
    std::string source;
    std::string kind;  // false_alarm | miss
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    double rate = 0.0;
    Interval interval;
    double delta = 0.0;
    bool flagged = false;
};

inline std::vector<AuditCell> audit_error_caps(const std::vector<CellAggregate>& cells, double delta) {
    std::vector<AuditCell> out;
    for (const auto& c : cells) {
        AuditCell a;
        a.cell = c.cell;
        a.algorithm = c.algorithm;
        a.source = c.source;
        a.kind = c.truth == Decision::H0 ? "false_alarm" : "miss";
        a.trials = c.trials;
        a.errors = c.trials - c.correct;
        a.rate = c.error_rate();
        a.interval = c.error_interval;
        a.delta = delta;
        a.flagged = a.interval.low > delta;
        out.push_back(a);
    }
    return out;
}

inline nlohmann::json to_json(const AuditCell& a) {
    return nlohmann::json{{"cell", a.cell},         {"algorithm", a.algorithm},
                          {"source", a.source},     {"kind", a.kind},
                          {"trials", a.trials},     {"errors", a.errors},
                          {"rate", a.rate},         {"wilson95_low", a.interval.low},
                          {"wilson95_high", a.interval.high}, {"delta", a.delta},
                          {"flagged", a.flagged}};
}

}  // namespace uniftest::harness
