// uniftest: command-line front end for the coincidence-based uniformity tests.
//
//   uniftest sct run --m M --epsilon E --delta D --source SRC --seed N
//   uniftest abc run --epsilon E --delta D --L L [--c0 C] --source SRC --seed N [--reduced]
//   uniftest batch run --m M --epsilon E --cn CN --ct CT --source SRC --seed N
//   uniftest experiment --preset {figure1|smoke|audit} --out DIR --seed N --trials N [--reduced] [--abc]
//   uniftest gridsearch --algorithm {sct|batch|abc} ...
//   uniftest fixtures make-lower-bound --L L --epsilon E --eta H (--bits B | --bits-seed N) [--out FILE]
//
// Every subcommand also reads its flags from a TOML file given by --config;
// see README.md for the schema.
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uniftest/harness/experiment.hpp"

namespace {

using namespace uniftest;
using namespace uniftest::harness;
using nlohmann::json;

json verdict_json(const Verdict& v) {
    json j{{"decision", std::string(to_string(v.decision))}, {"samples_used", v.samples_used}};
    j["exit_epoch"] = v.exit_epoch ? json(*v.exit_epoch) : json(nullptr);
    return j;
}

std::vector<int> parse_bits(const std::string& text) {
    std::vector<int> bits;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "1" || tok == "+1")
            bits.push_back(1);
        else if (tok == "-1")
            bits.push_back(-1);
        else
            throw std::invalid_argument("bits must be a comma-separated list of +1/-1, got '" + tok + "'");
    }
    return bits;
}

void warn_all(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

struct SctArgs {
    SctConfig config;
    std::string source = "uniform";
    std::uint64_t seed = 0;
    std::uint64_t max_epochs = 0;
};

struct AbcArgs {
    AbcConfig config;
    double c0 = 0.0;
    std::string source = "uniform";
    std::uint64_t seed = 0;
    std::uint64_t max_epochs = 0;
};

struct BatchArgs {
    BatchConfig config{0, 0.0, 1.0, 1.0};
    std::string source = "uniform";
    std::uint64_t seed = 0;
};

struct ExperimentArgs {
    std::string preset = "smoke";
    std::string out = "out";
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;
    bool reduced = false;
    bool abc = false;
    bool confident = false;
};

struct GridArgs {
    std::string algorithm = "sct";
    std::uint64_t m = 20000;
    double epsilon = 0.3;
    double delta = 0.2;
    double lipschitz = 4.0;
    double eta = 0.25;
    double c0 = 16.0;
    std::string h1;
    std::vector<double> thresholds;
    std::vector<double> second;
    std::vector<double> deltas;
    std::uint64_t trials = 100;
    std::uint64_t seed = 0;
    double floor = 0.8;
    bool confident = false;
};

struct FixtureArgs {
    double lipschitz = 1.0;
    double epsilon = 0.0;
    double eta = 0.0;
    std::string bits;
    std::optional<std::uint64_t> bits_seed;
    std::string out;
};

int run_sct(const SctArgs& a) {
    SctConfig c = a.config;
    if (a.max_epochs) c.max_epochs_override = a.max_epochs;
    c.validate();
    warn_all(sct_validate_regime(c));
    const auto src = DiscreteSource::parse(a.source, c.m);
    std::cout << verdict_json(run_sct_trial(c, src, a.seed)).dump() << '\n';
    return 0;
}

int run_abc(const AbcArgs& a) {
    AbcConfig c = a.config;
    if (a.c0 > 0.0) c.c0 = a.c0;
    if (a.max_epochs) c.max_epochs_override = a.max_epochs;
    c.validate();
    if (!c.reduced && abc_worst_case_samples(c) > kFeasibleSampleBudget)
        std::cerr << "warning: worst case needs " << format_double(abc_worst_case_samples(c))
                  << " samples; consider --reduced with a small --c0\n";
    const auto src = ContinuousSource::parse(a.source);
    std::cout << verdict_json(run_abc_trial(c, src, a.seed)).dump() << '\n';
    return 0;
}

int run_batch(const BatchArgs& a) {
    a.config.validate();
    const auto src = DiscreteSource::parse(a.source, a.config.m);
    std::cout << verdict_json(run_batch_trial(a.config, src, a.seed)).dump() << '\n';
    return 0;
}

int run_experiment_cmd(const ExperimentArgs& a) {
    ExperimentConfig c = ExperimentConfig::preset_named(a.preset);
    c.master_seed = a.seed;
    if (a.trials) c.trials = c.calibration_trials = a.trials;
    c.reduced = a.reduced;
    c.run_abc = a.abc || a.reduced;
    c.confident_floor = a.confident;
    const double est = c.worst_case_samples();
    std::cerr << "preset " << c.preset << ": " << c.trials << " trials per cell, up to "
              << format_double(std::round(est)) << " SCT/batch samples (~" << format_double(std::ceil(est * 2e-8))
              << " s single-threaded at 50M samples/s)\n";
    const auto start = std::chrono::steady_clock::now();
    const ExperimentResult result = run_experiment(c);
    write_outputs(result, a.out);
    warn_all(result.warnings);
    for (const auto& cell : result.cells)
        std::cerr << cell.algorithm << ' ' << cell.source << ": accuracy " << format_double(cell.accuracy)
                  << ", mean samples " << format_double(cell.samples.mean) << '\n';
    for (const auto& au : result.audit)
        if (au.flagged) std::cerr << "AUDIT FLAG: " << to_json(au).dump() << '\n';
    std::cerr << "wrote " << a.out << " in "
              << format_double(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count())
              << " s\n";
    return 0;
}

int run_gridsearch(const GridArgs& a) {
    const CalibrationSeeds seeds{a.seed, 1, 2, a.trials};
    GridSearchResult result;
    if (a.algorithm == "sct" || a.algorithm == "batch") {
        const auto h0 = DiscreteSource::uniform(a.m);
        const auto h1 =
            a.h1.empty() ? DiscreteSource::perturbed(a.m, a.epsilon) : DiscreteSource::parse(a.h1, a.m);
        if (a.algorithm == "sct") {
            SctConfig base;
            base.m = a.m;
            base.epsilon = a.epsilon;
            base.delta = a.delta;
            result = sct_grid_search(base, h0, h1, a.thresholds, a.second, a.deltas, seeds, {a.floor, a.confident});
        } else {
            BatchConfig base{a.m, a.epsilon, 1.0, 1.0};
            result = batch_grid_search(base, h0, h1, a.second, a.thresholds, seeds, {a.floor, a.confident});
        }
    } else if (a.algorithm == "abc") {
        AbcConfig base;
        base.epsilon = a.epsilon;
        base.delta = a.delta;
        base.lipschitz_bound = a.lipschitz;
        base.c0 = a.c0;
        base.reduced = true;
        ContinuousSource h1 = ContinuousSource::uniform();
        if (a.h1.empty()) {
            const auto spec = LowerBoundFamilySpec::resolve(a.lipschitz, a.epsilon, a.eta);
            h1 = ContinuousSource::from_density(
                make_lower_bound_density(spec.with_bits(std::vector<int>(spec.bit_count(), 1))), "lower_bound");
        } else {
            h1 = ContinuousSource::parse(a.h1);
        }
        result = abc_grid_search(base, ContinuousSource::uniform(), h1, a.thresholds, a.second, seeds, {a.floor, a.confident});
    } else {
        throw std::invalid_argument("unknown algorithm '" + a.algorithm + "'");
    }
    std::cout << to_json(result).dump(2) << '\n';
    if (!result.feasible()) {
        std::cerr << "infeasible grid: no point reaches accuracy " << format_double(a.floor) << '\n';
        return 3;
    }
    return 0;
}

int run_fixture(const FixtureArgs& a) {
    auto spec = LowerBoundFamilySpec::resolve(a.lipschitz, a.epsilon, a.eta);
    if (a.bits_seed) {
        Rng rng(*a.bits_seed);
        spec = spec.with_random_bits(rng);
    } else {
        auto bits = a.bits.empty() ? std::vector<int>(spec.bit_count(), 1) : parse_bits(a.bits);
        if (bits.size() != spec.bit_count())
            throw std::invalid_argument("expected " + std::to_string(spec.bit_count()) + " bits, got " +
                                        std::to_string(bits.size()));
        spec = spec.with_bits(std::move(bits));
    }
    const std::string text = lower_bound_to_json(spec).dump(2) + "\n";
    if (a.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream(a.out, std::ios::binary) << text;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential coincidence-based uniformity tests"};
    app.set_config("--config", "", "TOML file with flag values");
    app.require_subcommand(1);

    SctArgs sct;
    auto* sct_cmd = app.add_subcommand("sct", "Sequential coincidence test on a discrete source");
    auto* sct_run_cmd = sct_cmd->add_subcommand("run", "Run a single test and print the verdict as JSON");
    sct_cmd->require_subcommand(1);
    sct_run_cmd->add_option("--m", sct.config.m, "Support size")->required();
    sct_run_cmd->add_option("--epsilon", sct.config.epsilon, "Separation")->required();
    sct_run_cmd->add_option("--delta", sct.config.delta, "Error probability")->required();
    sct_run_cmd->add_option("--source", sct.source, "uniform | perturbed:GAMMA | pmf.json");
    sct_run_cmd->add_option("--seed", sct.seed, "Engine seed");
    sct_run_cmd->add_option("--threshold", sct.config.threshold_multiplier, "Threshold multiplier")
        ->capture_default_str();
    sct_run_cmd->add_option("--kappa-mult", sct.config.kappa_multiplier, "Epoch budget multiplier")
        ->capture_default_str();
    sct_run_cmd->add_option("--max-epochs", sct.max_epochs, "Cap on the epoch budget (0: none)");

    AbcArgs abc;
    auto* abc_cmd = app.add_subcommand("abc", "Adaptive binning coincidence test on [0,1] samples");
    auto* abc_run_cmd = abc_cmd->add_subcommand("run", "Run a single test and print the verdict as JSON");
    abc_cmd->require_subcommand(1);
    abc_run_cmd->add_option("--epsilon", abc.config.epsilon, "Separation")->required();
    abc_run_cmd->add_option("--delta", abc.config.delta, "Error probability")->required();
    abc_run_cmd->add_option("--L", abc.config.lipschitz_bound, "Lipschitz bound")->capture_default_str();
    abc_run_cmd->add_option("--c0", abc.c0, "Bin growth constant (default: max(28212, m0, 2L))");
    abc_run_cmd->add_option("--source", abc.source, "uniform | density.json");
    abc_run_cmd->add_option("--seed", abc.seed, "Engine seed");
    abc_run_cmd->add_option("--threshold", abc.config.threshold_multiplier, "Threshold multiplier")
        ->capture_default_str();
    abc_run_cmd->add_option("--max-epochs", abc.max_epochs, "Cap on the epoch budget (0: none)");
    abc_run_cmd->add_flag("--reduced", abc.config.reduced, "Allow c0 below 2L");

    BatchArgs batch;
    auto* batch_cmd = app.add_subcommand("batch", "Fixed-sample coincidence test");
    auto* batch_run_cmd = batch_cmd->add_subcommand("run", "Run a single test and print the verdict as JSON");
    batch_cmd->require_subcommand(1);
    batch_run_cmd->add_option("--m", batch.config.m, "Support size")->required();
    batch_run_cmd->add_option("--epsilon", batch.config.epsilon, "Separation")->required();
    batch_run_cmd->add_option("--cn", batch.config.sample_multiplier, "Sample size multiplier")->required();
    batch_run_cmd->add_option("--ct", batch.config.threshold_multiplier, "Threshold multiplier")->required();
    batch_run_cmd->add_option("--source", batch.source, "uniform | perturbed:GAMMA | pmf.json");
    batch_run_cmd->add_option("--seed", batch.seed, "Engine seed");

    ExperimentArgs exp;
    auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo sweep with calibrated constants");
    exp_cmd->add_option("--preset", exp.preset, "figure1 | smoke | audit")
        ->check(CLI::IsMember({"figure1", "smoke", "audit"}))
        ->capture_default_str();
    exp_cmd->add_option("--out", exp.out, "Output directory")->capture_default_str();
    exp_cmd->add_option("--seed", exp.seed, "Master seed");
    exp_cmd->add_option("--trials", exp.trials, "Trials per cell (0: preset default)");
    exp_cmd->add_flag("--abc", exp.abc, "Include the adaptive binning test");
    exp_cmd->add_flag("--reduced", exp.reduced, "Reduced ABC constants (implies --abc)");
    exp_cmd->add_flag("--confident-floor", exp.confident, "Calibrate against the Wilson 95% lower bound of accuracy");

    GridArgs grid;
    auto* grid_cmd = app.add_subcommand("gridsearch", "Calibrate test constants against an accuracy floor");
    grid_cmd->add_option("--algorithm", grid.algorithm, "sct | batch | abc")
        ->check(CLI::IsMember({"sct", "batch", "abc"}))
        ->capture_default_str();
    grid_cmd->add_option("--m", grid.m, "Support size (sct, batch)")->capture_default_str();
    grid_cmd->add_option("--epsilon", grid.epsilon, "Separation")->capture_default_str();
    grid_cmd->add_option("--delta", grid.delta, "Error probability in the schedule")->capture_default_str();
    grid_cmd->add_option("--L", grid.lipschitz, "Lipschitz bound (abc)")->capture_default_str();
    grid_cmd->add_option("--eta", grid.eta, "Lower-bound family slack (abc)")->capture_default_str();
    grid_cmd->add_option("--c0", grid.c0, "Bin growth constant (abc, reduced)")->capture_default_str();
    grid_cmd->add_option("--h1", grid.h1, "Alternative source (default: perturbed:epsilon or lower bound)");
    grid_cmd->add_option("--thresholds", grid.thresholds, "Threshold multipliers (C_t for batch)")
        ->delimiter(',')
        ->required();
    grid_cmd->add_option("--second", grid.second, "kappa multipliers (sct), C_n (batch) or epoch caps (abc)")
        ->delimiter(',')
        ->required();
    grid_cmd->add_option("--deltas", grid.deltas, "delta values to search (sct; default: --delta)")->delimiter(',');
    grid_cmd->add_option("--trials", grid.trials, "Calibration trials per hypothesis")->capture_default_str();
    grid_cmd->add_option("--seed", grid.seed, "Master seed");
    grid_cmd->add_option("--floor", grid.floor, "Accuracy floor")->capture_default_str();
    grid_cmd->add_flag("--confident", grid.confident, "Floor applies to the Wilson 95% lower bound");

    FixtureArgs fx;
    auto* fx_cmd = app.add_subcommand("fixtures", "Generate distribution fixtures");
    auto* lb_cmd = fx_cmd->add_subcommand("make-lower-bound", "Triangle-wave density from the lower-bound family");
    fx_cmd->require_subcommand(1);
    lb_cmd->add_option("--L", fx.lipschitz, "Lipschitz bound")->required();
    lb_cmd->add_option("--epsilon", fx.epsilon, "Target distance")->required();
    lb_cmd->add_option("--eta", fx.eta, "Width slack")->required();
    auto* bits_opt = lb_cmd->add_option("--bits", fx.bits, "Comma-separated +1/-1 signs (default all +1)");
    lb_cmd->add_option("--bits-seed", fx.bits_seed, "Draw random signs from this seed")->excludes(bits_opt);
    lb_cmd->add_option("--out", fx.out, "Output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sct_run_cmd) return run_sct(sct);
        if (*abc_run_cmd) return run_abc(abc);
        if (*batch_run_cmd) return run_batch(batch);
        if (*exp_cmd) return run_experiment_cmd(exp);
        if (*grid_cmd) return run_gridsearch(grid);
        if (*lb_cmd) return run_fixture(fx);
    } catch (const InfeasibleSchedule& e) {
        std::cerr << "refusing: " << e.what() << '\n';
        return 4;
    } catch (const InfeasibleGrid& e) {
        std::cerr << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
