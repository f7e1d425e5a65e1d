// grid_search.hpp
//
// Exhaustive grid search over test constants. A grid point is feasible when
// its empirical accuracy reaches the floor on both the H0 and the H1
// calibration source; the winner is the feasible point with the smallest
// mean sample count (pooled over both sources), ties going to the
// lexicographically smallest point. With a confident floor the Wilson 95%
// lower bound of each accuracy must reach the floor instead of the point
// estimate, which keeps the winner's fresh-trial accuracy from sitting on
// the floor itself.
//
// The engine-specific evaluators replay per-trial traces instead of rerunning
// every grid point: each calibration trial is run once with the largest
// threshold and the largest epoch budget, recording every epoch statistic.
// Because the schedule n_k does not depend on either constant, the verdict of
// any smaller threshold or budget on the same seed is read off the trace and
// matches a direct run exactly.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "uniftest/harness/stats.hpp"
#include "uniftest/harness/trials.hpp"

namespace uniftest::harness {

struct GridEvaluation {
    std::vector<double> point;
    double h0_accuracy = 0.0;
    double h1_accuracy = 0.0;
    std::uint64_t h0_trials = 0;
    std::uint64_t h1_trials = 0;
    double mean_samples = 0.0;
    bool feasible = false;
};

struct AccuracyFloor {
    double value = 0.8;
    bool confident = false;

    AccuracyFloor() = default;
    AccuracyFloor(double v, bool wilson = false) : value(v), confident(wilson) {}  // NOLINT: implicit from double

    bool met(double accuracy, std::uint64_t trials) const {
        if (!confident) return accuracy >= value;
        const auto correct = static_cast<std::uint64_t>(std::llround(accuracy * static_cast<double>(trials)));
        return wilson_interval(correct, trials).low >= value;
    }
};

struct GridSearchResult {
    std::vector<std::string> parameters;
    AccuracyFloor accuracy_floor;
    std::vector<GridEvaluation> evaluations;
    std::optional<GridEvaluation> winner;

    bool feasible() const noexcept { return winner.has_value(); }
};

/// Thrown when a grid search that must produce constants finds no feasible point.
class InfeasibleGrid : public std::runtime_error {
public:
    explicit InfeasibleGrid(const std::string& what) : std::runtime_error("infeasible grid: " + what) {}
};

inline std::vector<std::vector<double>> cartesian(const std::vector<std::vector<double>>& axes) {
    std::vector<std::vector<double>> out{{}};
    for (const auto& axis : axes) {
        if (axis.empty()) throw std::invalid_argument("grid axis is empty");
        std::vector<std::vector<double>> next;
        next.reserve(out.size() * axis.size());
        for (const auto& prefix : out)
            for (double v : axis) {
                auto p = prefix;
                p.push_back(v);
                next.push_back(std::move(p));
            }
        out = std::move(next);
    }
    return out;
}

/// Evaluates every point and picks the winner. `evaluate(point)` returns a
/// GridEvaluation with the accuracies and mean samples filled in.
template <class Evaluate>
GridSearchResult grid_search(std::vector<std::string> parameters, const std::vector<std::vector<double>>& points,
                             AccuracyFloor accuracy_floor, Evaluate&& evaluate) {
    GridSearchResult result;
    result.parameters = std::move(parameters);
    result.accuracy_floor = accuracy_floor;
    for (const auto& point : points) {
        GridEvaluation e = evaluate(point);
        e.point = point;
        e.feasible = accuracy_floor.met(e.h0_accuracy, e.h0_trials) && accuracy_floor.met(e.h1_accuracy, e.h1_trials);
        result.evaluations.push_back(e);
    }
    for (const auto& e : result.evaluations) {
        if (!e.feasible) continue;
        if (!result.winner || e.mean_samples < result.winner->mean_samples ||
            (e.mean_samples == result.winner->mean_samples && e.point < result.winner->point))
            result.winner = e;
    }
    return result;
}

inline nlohmann::json to_json(const GridSearchResult& r) {
    nlohmann::json j;
    j["parameters"] = r.parameters;
    j["accuracy_floor"] = r.accuracy_floor.value;
    j["floor_rule"] = r.accuracy_floor.confident ? "wilson95_low" : "point";
    j["feasible"] = r.feasible();
    auto eval_json = [](const GridEvaluation& e) {
        return nlohmann::json{{"point", e.point},
                              {"h0_accuracy", e.h0_accuracy},
                              {"h1_accuracy", e.h1_accuracy},
                              {"mean_samples", e.mean_samples},
                              {"feasible", e.feasible}};
    };
    j["winner"] = r.winner ? eval_json(*r.winner) : nlohmann::json(nullptr);
    j["evaluations"] = nlohmann::json::array();
    for (const auto& e : r.evaluations) j["evaluations"].push_back(eval_json(e));
    return j;
}

// ---------------------------------------------------------------------------
// Trace replay
// ---------------------------------------------------------------------------

/// Per-epoch statistic and threshold scale of one calibration trial.
struct EpochTrace {
    std::vector<double> statistic;
    std::vector<double> scale;
};

/// Verdict of a sequential test on a recorded trace, for threshold multiplier
/// `threshold` and epoch budget `kappa`. `samples_at(k)` gives n_k.
template <class SamplesAt>
Verdict replay_trace(const EpochTrace& trace, double threshold, std::uint64_t kappa, SamplesAt&& samples_at) {
    const std::uint64_t recorded = trace.statistic.size();
    for (std::uint64_t k = 1; k <= std::min(kappa, recorded); ++k) {
        if (rejects(trace.statistic[k - 1], threshold * trace.scale[k - 1])) return {Decision::H1, samples_at(k), k};
    }
    if (recorded < kappa && (recorded == 0 || !rejects(trace.statistic[recorded - 1],
                                                       threshold * trace.scale[recorded - 1])))
        throw std::logic_error("trace too short for the requested epoch budget");
    return {Decision::H0, samples_at(kappa), std::nullopt};
}

struct Accuracy {
    std::uint64_t correct = 0;
    std::uint64_t trials = 0;
    double samples_sum = 0.0;
};

inline GridEvaluation pooled(const Accuracy& h0, const Accuracy& h1) {
    GridEvaluation e;
    e.h0_accuracy = h0.trials ? static_cast<double>(h0.correct) / static_cast<double>(h0.trials) : 0.0;
    e.h1_accuracy = h1.trials ? static_cast<double>(h1.correct) / static_cast<double>(h1.trials) : 0.0;
    e.h0_trials = h0.trials;
    e.h1_trials = h1.trials;
    const auto n = static_cast<double>(h0.trials + h1.trials);
    e.mean_samples = n > 0 ? (h0.samples_sum + h1.samples_sum) / n : 0.0;
    return e;
}

struct CalibrationSeeds {
    std::uint64_t master_seed = 0;
    std::uint64_t h0_cell = 0;
    std::uint64_t h1_cell = 0;
    std::uint64_t trials = 100;
};

/// SCT grid over (threshold multiplier, kappa multiplier, delta). delta
/// changes the schedule, so each delta gets its own set of traces; an empty
/// `deltas` keeps base.delta.
inline GridSearchResult sct_grid_search(const SctConfig& base, const DiscreteSource& h0, const DiscreteSource& h1,
                                        const std::vector<double>& thresholds,
                                        const std::vector<double>& kappa_multipliers, std::vector<double> deltas,
                                        const CalibrationSeeds& seeds, AccuracyFloor accuracy_floor) {
    if (deltas.empty()) deltas.push_back(base.delta);
    SctConfig trace_base = base;
    trace_base.threshold_multiplier = *std::max_element(thresholds.begin(), thresholds.end());
    trace_base.kappa_multiplier = *std::max_element(kappa_multipliers.begin(), kappa_multipliers.end());

    auto traces_for = [&](const SctConfig& config, const DiscreteSource& source, std::uint64_t cell) {
        return parallel_map(seeds.trials, [&](std::size_t t) {
            EpochTrace trace;
            Rng rng(trial_seed(seeds.master_seed, cell, t));
            sct_run(
                config, [&]() -> std::optional<Symbol> { return source.draw(rng); },
                [&](const EpochRecord& r) {
                    trace.statistic.push_back(r.statistic);
                    trace.scale.push_back(r.threshold_scale);
                });
            return trace;
        });
    };
    struct TraceSet {
        SctConfig config;
        std::vector<EpochTrace> h0, h1;
    };
    std::vector<TraceSet> sets;
    for (double d : deltas) {
        TraceSet ts;
        ts.config = trace_base;
        ts.config.delta = d;
        ts.config.validate();
        ts.h0 = traces_for(ts.config, h0, seeds.h0_cell);
        ts.h1 = traces_for(ts.config, h1, seeds.h1_cell);
        sets.push_back(std::move(ts));
    }

    auto evaluate = [&](const std::vector<double>& point) {
        const auto& ts = sets[static_cast<std::size_t>(
            std::find(deltas.begin(), deltas.end(), point[2]) - deltas.begin())];
        SctConfig c = ts.config;
        c.threshold_multiplier = point[0];
        c.kappa_multiplier = point[1];
        const std::uint64_t kappa = c.kappa();
        auto samples_at = [&](std::uint64_t k) { return sct_schedule(ts.config, k).samples; };
        Accuracy a0, a1;
        for (const auto& tr : ts.h0) {
            const Verdict v = replay_trace(tr, c.threshold_multiplier, kappa, samples_at);
            a0.correct += v.decision == Decision::H0;
            ++a0.trials;
            a0.samples_sum += static_cast<double>(v.samples_used);
        }
        for (const auto& tr : ts.h1) {
            const Verdict v = replay_trace(tr, c.threshold_multiplier, kappa, samples_at);
            a1.correct += v.decision == Decision::H1;
            ++a1.trials;
            a1.samples_sum += static_cast<double>(v.samples_used);
        }
        return pooled(a0, a1);
    };
    return grid_search({"threshold_multiplier", "kappa_multiplier", "delta"},
                       cartesian({thresholds, kappa_multipliers, deltas}), accuracy_floor, evaluate);
}

/// Batch grid over (sample multiplier C_n, threshold multiplier C_t). One
/// stream per trial serves every C_n: K1 is read off at each sample size.
inline GridSearchResult batch_grid_search(const BatchConfig& base, const DiscreteSource& h0,
                                          const DiscreteSource& h1, const std::vector<double>& sample_multipliers,
                                          const std::vector<double>& threshold_multipliers,
                                          const CalibrationSeeds& seeds, AccuracyFloor accuracy_floor) {
    std::vector<std::uint64_t> sizes;
    for (double cn : sample_multipliers) {
        BatchConfig c = base;
        c.sample_multiplier = cn;
        c.validate();
        sizes.push_back(c.sample_size());
    }
    std::vector<std::uint64_t> checkpoints = sizes;
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

    // k1[trial][checkpoint index]
    auto k1_for = [&](const DiscreteSource& source, std::uint64_t cell) {
        return parallel_map(seeds.trials, [&](std::size_t t) {
            Rng rng(trial_seed(seeds.master_seed, cell, t));
            CoincidenceState state(base.m);
            std::vector<std::uint64_t> k1s;
            for (std::uint64_t target : checkpoints) {
                while (state.total() < target) state.insert(source.draw(rng));
                k1s.push_back(state.k1());
            }
            return k1s;
        });
    };
    const auto h0_k1 = k1_for(h0, seeds.h0_cell);
    const auto h1_k1 = k1_for(h1, seeds.h1_cell);

    auto evaluate = [&](const std::vector<double>& point) {
        BatchConfig c = base;
        c.sample_multiplier = point[0];
        c.threshold_multiplier = point[1];
        const std::uint64_t n = c.sample_size();
        const auto idx = static_cast<std::size_t>(
            std::lower_bound(checkpoints.begin(), checkpoints.end(), n) - checkpoints.begin());
        const double expected = expected_k1_uniform(n, c.m);
        const double threshold = c.threshold();
        Accuracy a0, a1;
        for (const auto& k1s : h0_k1) {
            a0.correct += !rejects(expected - static_cast<double>(k1s[idx]), threshold);
            ++a0.trials;
            a0.samples_sum += static_cast<double>(n);
        }
        for (const auto& k1s : h1_k1) {
            a1.correct += rejects(expected - static_cast<double>(k1s[idx]), threshold);
            ++a1.trials;
            a1.samples_sum += static_cast<double>(n);
        }
        return pooled(a0, a1);
    };
    return grid_search({"sample_multiplier", "threshold_multiplier"},
                       cartesian({sample_multipliers, threshold_multipliers}), accuracy_floor, evaluate);
}

/// ABC grid over (threshold multiplier, epoch cap).
inline GridSearchResult abc_grid_search(const AbcConfig& base, const ContinuousSource& h0,
                                        const ContinuousSource& h1, const std::vector<double>& thresholds,
                                        const std::vector<double>& epoch_caps, const CalibrationSeeds& seeds,
                                        AccuracyFloor accuracy_floor) {
    AbcConfig trace_config = base;
    trace_config.threshold_multiplier = *std::max_element(thresholds.begin(), thresholds.end());
    const auto max_cap = static_cast<std::uint64_t>(*std::max_element(epoch_caps.begin(), epoch_caps.end()));
    trace_config.max_epochs_override =
        base.max_epochs_override ? std::min(*base.max_epochs_override, max_cap) : max_cap;
    trace_config.validate();

    auto traces_for = [&](const ContinuousSource& source, std::uint64_t cell) {
        return parallel_map(seeds.trials, [&](std::size_t t) {
            EpochTrace trace;
            Rng rng(trial_seed(seeds.master_seed, cell, t));
            abc_run(
                trace_config, [&]() -> std::optional<double> { return source.draw(rng); },
                [&](const EpochRecord& r) {
                    trace.statistic.push_back(r.statistic);
                    trace.scale.push_back(r.threshold_scale);
                });
            return trace;
        });
    };
    const auto h0_traces = traces_for(h0, seeds.h0_cell);
    const auto h1_traces = traces_for(h1, seeds.h1_cell);

    auto evaluate = [&](const std::vector<double>& point) {
        AbcConfig c = base;
        c.threshold_multiplier = point[0];
        const auto cap = static_cast<std::uint64_t>(point[1]);
        c.max_epochs_override = base.max_epochs_override ? std::min(*base.max_epochs_override, cap) : cap;
        const std::uint64_t kappa = c.kappa();
        auto samples_at = [&](std::uint64_t k) { return abc_schedule(trace_config, k).samples; };
        Accuracy a0, a1;
        for (const auto& tr : h0_traces) {
            const Verdict v = replay_trace(tr, c.threshold_multiplier, kappa, samples_at);
            a0.correct += v.decision == Decision::H0;
            ++a0.trials;
            a0.samples_sum += static_cast<double>(v.samples_used);
        }
        for (const auto& tr : h1_traces) {
            const Verdict v = replay_trace(tr, c.threshold_multiplier, kappa, samples_at);
            a1.correct += v.decision == Decision::H1;
            ++a1.trials;
            a1.samples_sum += static_cast<double>(v.samples_used);
        }
        return pooled(a0, a1);
    };
    return grid_search({"threshold_multiplier", "epoch_cap"}, cartesian({thresholds, epoch_caps}), accuracy_floor,
                       evaluate);
}

}  // namespace uniftest::harness
