// experiment.hpp
//
// Monte Carlo sweeps behind the `experiment` CLI: calibrate constants by grid
// search, run every (algorithm, source) cell, aggregate, audit error caps and
// write trials.csv / report.json / plot.svg.
//
// Cell ids (they feed the seed derivation, so they are fixed):
//   calibration  sct H0 = 1, sct H1 = 2, batch H0 = 3, batch H1 = 4,
//                abc H0 = 5, abc H1 = 6
//   sweep        sct = 100 + s, batch = 200 + s, abc = 300 + s, where s = 0
//                is the uniform source and s = i + 1 the i-th alternative.
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "uniftest/harness/grid_search.hpp"
#include "uniftest/harness/plot.hpp"
#include "uniftest/harness/report.hpp"
#include "uniftest/harness/trials.hpp"

namespace uniftest::harness {

inline constexpr const char* kSeedDerivation =
    "trial_seed = splitmix64(splitmix64(master ^ (cell * 0xD1B54A32D192ED03)) + trial); "
    "engine = mt19937_64(trial_seed)";

/// Default-constant ABC schedules above this many worst-case samples per trial
/// are refused unless reduced-constant mode is requested.
inline constexpr double kFeasibleSampleBudget = 1e9;

class InfeasibleSchedule : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string preset = "custom";
    std::uint64_t master_seed = 0;
    std::uint64_t trials = 100;
    std::uint64_t calibration_trials = 100;
    double accuracy_floor = 0.8;
    // require the Wilson 95% lower bound of calibration accuracy to reach the floor
    bool confident_floor = false;

    // discrete problem
    std::uint64_t m = 20000;
    double epsilon = 0.3;
    double delta = 0.2;
    std::vector<double> gammas{0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6};

    bool run_sct = true;
    bool run_batch = true;
    bool run_abc = false;
    bool reduced = false;
    bool audit = false;

    // SCT: grid search when sct_grid_search, otherwise the fixed constants.
    bool sct_grid_search = true;
    std::vector<double> sct_thresholds{0.2, 0.25, 0.3, 0.35, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
                                       1.0, 1.2, 1.4, 1.7, 2.0, 2.5, 3.0, 4.0, 5.0, 7.0};
    std::vector<double> sct_kappa_multipliers{0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0};
    std::vector<double> sct_deltas{0.2, 0.1, 0.05, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10, 1e-15, 1e-20};
    double sct_threshold = 7.0;
    double sct_kappa_multiplier = 112.0;

    std::vector<double> batch_sample_multipliers;
    std::vector<double> batch_threshold_multipliers;

    // ABC (reduced-constant mode): uniform vs one triangle-wave density.
    double abc_epsilon = 0.4;
    double abc_eta = 0.25;
    double abc_lipschitz = 4.0;
    double abc_c0 = 16.0;
    std::uint64_t abc_epoch_cap = 200;
    std::vector<double> abc_thresholds{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0};
    std::vector<double> abc_epoch_caps{2, 3, 4, 5, 6, 8, 10, 12, 16};

    static std::vector<double> range(double lo, double hi, double step) {
        std::vector<double> v;
        const auto n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
        char buf[32];
        for (int i = 0; i <= n; ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", lo + step * i);
            v.push_back(std::stod(buf));
        }
        return v;
    }

    static ExperimentConfig figure1() {
        ExperimentConfig c;
        c.preset = "figure1";
        c.trials = 1000;
        c.calibration_trials = 1000;
        c.batch_sample_multipliers = range(0.5, 6.0, 0.25);
        c.batch_threshold_multipliers = range(0.005, 1.0, 0.005);
        return c;
    }

    /// Small-support variant. At m = 3000 no SCT constants reach 0.8 accuracy
    /// against p^0.3 (the required sample size exceeds m), so the separation
    /// and the alternatives move up to 0.5 .. 0.8.
    static ExperimentConfig smoke() {
        ExperimentConfig c = figure1();
        c.preset = "smoke";
        c.m = 3000;
        c.epsilon = 0.5;
        c.gammas = {0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8};
        c.trials = 100;
        c.calibration_trials = 100;
        return c;
    }

    /// SCT at the theoretical constants, far enough above m0 that the
    /// detection threshold is reachable for the p^0.4 alternative.
    static ExperimentConfig audit_preset() {
        ExperimentConfig c;
        c.preset = "audit";
        c.trials = 1000;
        c.calibration_trials = 100;
        c.m = 500000;
        c.gammas = {0.4};
        c.run_batch = false;
        c.sct_grid_search = false;
        c.audit = true;
        return c;
    }

    static ExperimentConfig preset_named(const std::string& name) {
        if (name == "figure1") return figure1();
        if (name == "smoke") return smoke();
        if (name == "audit") return audit_preset();
        throw std::invalid_argument("unknown preset '" + name + "' (figure1 | smoke | audit)");
    }

    SctConfig sct_base() const {
        SctConfig s;
        s.m = m;
        s.epsilon = epsilon;
        s.delta = delta;
        s.threshold_multiplier = sct_threshold;
        s.kappa_multiplier = sct_kappa_multiplier;
        return s;
    }

    AbcConfig abc_base() const {
        AbcConfig a;
        a.epsilon = abc_epsilon;
        a.delta = delta;
        a.lipschitz_bound = abc_lipschitz;
        if (reduced) {
            a.c0 = abc_c0;
            a.reduced = true;
            a.max_epochs_override = abc_epoch_cap;
        }
        return a;
    }

    LowerBoundFamilySpec abc_alternative_spec() const {
        auto spec = LowerBoundFamilySpec::resolve(abc_lipschitz, abc_epsilon, abc_eta);
        return spec.with_bits(std::vector<int>(spec.bit_count(), 1));
    }

    /// Worst-case samples summed over every trial the experiment may run.
    double worst_case_samples() const {
        double total = 0.0;
        const auto sources = static_cast<double>(gammas.size() + 1);
        if (run_sct) {
            SctConfig s = sct_base();
            if (sct_grid_search) {
                s.kappa_multiplier = *std::max_element(sct_kappa_multipliers.begin(), sct_kappa_multipliers.end());
                s.delta = *std::min_element(sct_deltas.begin(), sct_deltas.end());
            }
            const double n = static_cast<double>(sct_schedule(s, s.kappa()).samples);
            total += n * (static_cast<double>(trials) * sources + (sct_grid_search ? 2.0 * calibration_trials : 0.0));
        }
        if (run_batch && !batch_sample_multipliers.empty()) {
            BatchConfig b{m, epsilon,
                          *std::max_element(batch_sample_multipliers.begin(), batch_sample_multipliers.end()), 1.0};
            total += static_cast<double>(b.sample_size()) * (static_cast<double>(trials) * sources +
                                                              2.0 * calibration_trials);
        }
        return total;
    }

    AccuracyFloor calibration_floor() const { return {accuracy_floor, confident_floor}; }

    nlohmann::json to_json() const {
        return nlohmann::json{{"preset", preset},
                              {"master_seed", master_seed},
                              {"trials", trials},
                              {"calibration_trials", calibration_trials},
                              {"accuracy_floor", accuracy_floor},
                              {"confident_floor", confident_floor},
                              {"m", m},
                              {"epsilon", epsilon},
                              {"delta", delta},
                              {"gammas", gammas},
                              {"algorithms", {{"sct", run_sct}, {"batch", run_batch}, {"abc", run_abc}}},
                              {"reduced", reduced},
                              {"audit", audit},
                              {"sct_grid_search", sct_grid_search},
                              {"sct_thresholds", sct_thresholds},
                              {"sct_kappa_multipliers", sct_kappa_multipliers},
                              {"sct_deltas", sct_deltas},
                              {"sct_threshold", sct_threshold},
                              {"sct_kappa_multiplier", sct_kappa_multiplier},
                              {"batch_sample_multipliers", batch_sample_multipliers},
                              {"batch_threshold_multipliers", batch_threshold_multipliers},
                              {"abc",
                               {{"epsilon", abc_epsilon},
                                {"eta", abc_eta},
                                {"L", abc_lipschitz},
                                {"c0", abc_c0},
                                {"epoch_cap", abc_epoch_cap},
                                {"thresholds", abc_thresholds},
                                {"epoch_caps", abc_epoch_caps}}}};
    }
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<TrialRecord> records;
    std::vector<CellAggregate> cells;
    std::optional<GridSearchResult> sct_grid, batch_grid, abc_grid;
    std::optional<SctConfig> sct_constants;
    std::optional<BatchConfig> batch_constants;
    std::optional<AbcConfig> abc_constants;
    std::vector<AuditCell> audit;
    std::vector<std::string> warnings;

    nlohmann::json report() const {
        nlohmann::json j;
        j["schema"] = kReportSchema;
        j["preset"] = config.preset;
        j["master_seed"] = config.master_seed;
        j["seed_derivation"] = kSeedDerivation;
        j["config"] = config.to_json();
        nlohmann::json constants = nlohmann::json::object();
        if (sct_constants)
            constants["sct"] = {{"threshold_multiplier", sct_constants->threshold_multiplier},
                                {"kappa_multiplier", sct_constants->kappa_multiplier},
                                {"kappa", sct_constants->kappa()},
                                {"delta", sct_constants->delta}};
        if (batch_constants)
            constants["batch"] = {{"sample_multiplier", batch_constants->sample_multiplier},
                                  {"threshold_multiplier", batch_constants->threshold_multiplier},
                                  {"sample_size", batch_constants->sample_size()}};
        if (abc_constants)
            constants["abc"] = {{"c0", abc_constants->resolved_c0()},
                                {"threshold_multiplier", abc_constants->threshold_multiplier},
                                {"kappa", abc_constants->kappa()},
                                {"reduced", abc_constants->reduced}};
        j["constants"] = constants;
        nlohmann::json grids = nlohmann::json::object();
        if (sct_grid) grids["sct"] = to_json(*sct_grid);
        if (batch_grid) grids["batch"] = to_json(*batch_grid);
        if (abc_grid) grids["abc"] = to_json(*abc_grid);
        j["grid_search"] = grids;
        j["cells"] = cells_to_json(cells);
        if (config.audit) {
            j["audit"] = nlohmann::json::array();
            for (const auto& a : audit) j["audit"].push_back(to_json(a));
        }
        j["warnings"] = warnings;
        return j;
    }
};

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    ExperimentResult result;
    result.config = config;
    const std::uint64_t seed = config.master_seed;
    auto calib = [&](std::uint64_t h0, std::uint64_t h1) {
        return CalibrationSeeds{seed, h0, h1, config.calibration_trials};
    };

    std::vector<DiscreteSource> alternatives;
    for (double g : config.gammas) alternatives.push_back(DiscreteSource::perturbed(config.m, g));
    const DiscreteSource uniform = DiscreteSource::uniform(config.m);

    if (config.run_abc && !config.reduced) {
        const AbcConfig full = config.abc_base();
        const double n_kappa = abc_worst_case_samples(full);
        if (n_kappa > kFeasibleSampleBudget)
            throw InfeasibleSchedule("default-constant ABC needs up to " + format_double(n_kappa) +
                                     " samples per trial (c0 = " + format_double(full.resolved_c0()) +
                                     ", kappa = " + std::to_string(full.kappa()) +
                                     "); rerun with --reduced for desk-scale constants");
    }

    // calibration
    if (config.run_sct) {
        SctConfig sct = config.sct_base();
        if (config.sct_grid_search) {
            result.sct_grid = sct_grid_search(sct, uniform, DiscreteSource::perturbed(config.m, config.epsilon),
                                              config.sct_thresholds, config.sct_kappa_multipliers, config.sct_deltas,
                                              calib(1, 2), config.calibration_floor());
            if (!result.sct_grid->feasible())
                throw InfeasibleGrid("no SCT grid point reaches accuracy " + format_double(config.accuracy_floor));
            sct.threshold_multiplier = result.sct_grid->winner->point[0];
            sct.kappa_multiplier = result.sct_grid->winner->point[1];
            sct.delta = result.sct_grid->winner->point[2];
        }
        sct.validate();
        result.sct_constants = sct;
        for (auto& w : sct_validate_regime(sct)) result.warnings.push_back("sct: " + w);
    }
    if (config.run_batch) {
        BatchConfig base{config.m, config.epsilon, 1.0, 1.0};
        result.batch_grid = batch_grid_search(base, uniform, DiscreteSource::perturbed(config.m, config.epsilon),
                                              config.batch_sample_multipliers, config.batch_threshold_multipliers,
                                              calib(3, 4), config.calibration_floor());
        if (!result.batch_grid->feasible())
            throw InfeasibleGrid("no batch grid point reaches accuracy " + format_double(config.accuracy_floor));
        base.sample_multiplier = result.batch_grid->winner->point[0];
        base.threshold_multiplier = result.batch_grid->winner->point[1];
        result.batch_constants = base;
    }
    const LowerBoundFamilySpec lb = config.abc_alternative_spec();
    const ContinuousSource abc_alt =
        ContinuousSource::from_density(make_lower_bound_density(lb), "lower_bound:" + format_double(lb.distance()));
    if (config.run_abc) {
        AbcConfig abc = config.abc_base();
        result.abc_grid = abc_grid_search(abc, ContinuousSource::uniform(), abc_alt, config.abc_thresholds,
                                          config.abc_epoch_caps, calib(5, 6), config.calibration_floor());
        if (!result.abc_grid->feasible())
            throw InfeasibleGrid("no ABC grid point reaches accuracy " + format_double(config.accuracy_floor));
        abc.threshold_multiplier = result.abc_grid->winner->point[0];
        const auto cap = static_cast<std::uint64_t>(result.abc_grid->winner->point[1]);
        abc.max_epochs_override = abc.max_epochs_override ? std::min(*abc.max_epochs_override, cap) : cap;
        abc.validate();
        result.abc_constants = abc;
    }

    // sweep
    std::vector<Cell> cells;
    if (result.sct_constants) {
        const SctConfig sct = *result.sct_constants;
        auto add = [&](std::uint64_t s, const DiscreteSource& src) {
            cells.push_back({100 + s, "sct", src.label(), src.gamma(),
                             [sct, src](std::uint64_t sd) { return run_sct_trial(sct, src, sd); }});
        };
        add(0, uniform);
        for (std::size_t i = 0; i < alternatives.size(); ++i) add(i + 1, alternatives[i]);
    }
    if (result.batch_constants) {
        const BatchConfig b = *result.batch_constants;
        auto add = [&](std::uint64_t s, const DiscreteSource& src) {
            cells.push_back({200 + s, "batch", src.label(), src.gamma(),
                             [b, src](std::uint64_t sd) { return run_batch_trial(b, src, sd); }});
        };
        add(0, uniform);
        for (std::size_t i = 0; i < alternatives.size(); ++i) add(i + 1, alternatives[i]);
    }
    if (result.abc_constants) {
        const AbcConfig a = *result.abc_constants;
        const ContinuousSource u = ContinuousSource::uniform();
        cells.push_back({300, "abc", u.label(), 0.0, [a, u](std::uint64_t sd) { return run_abc_trial(a, u, sd); }});
        cells.push_back({301, "abc", abc_alt.label(), abc_alt.gamma(),
                         [a, abc_alt](std::uint64_t sd) { return run_abc_trial(a, abc_alt, sd); }});
    }
    for (const auto& cell : cells) {
        auto recs = run_cell(cell, config.trials, seed);
        result.records.insert(result.records.end(), recs.begin(), recs.end());
    }
    result.cells = aggregate(result.records);
    if (config.audit) result.audit = audit_error_caps(result.cells, config.delta);
    return result;
}

inline std::string trials_csv(const std::vector<TrialRecord>& records) {
    std::ostringstream out;
    write_trials_csv(out, records);
    return out.str();
}

/// Writes trials.csv, report.json, plot.svg, plot.csv and timing.json into dir.
/// Everything except timing.json is a deterministic function of the config.
inline void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "trials.csv", std::ios::binary) << trials_csv(result.records);
    std::ofstream(dir / "report.json", std::ios::binary) << result.report().dump(2) << '\n';
    emit_plot(result.cells, (dir / "plot.svg").string(), (dir / "plot.csv").string());
    nlohmann::json timing;
    double total = 0.0;
    std::map<std::string, double> per_cell;
    for (const auto& r : result.records) {
        total += r.wall_time_seconds;
        per_cell[std::to_string(r.cell)] += r.wall_time_seconds;
    }
    timing["trial_seconds_total"] = total;
    timing["trial_seconds_by_cell"] = per_cell;
    std::ofstream(dir / "timing.json", std::ios::binary) << timing.dump(2) << '\n';
}

}  // namespace uniftest::harness
