// Command line episode runner: run scenarios, export plot-ready field grids,
// and exercise the verification oracles.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "riskplan/scenario.hpp"
#include "riskplan/trace.hpp"
#include "riskplan/verify.hpp"

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitPlannerFailure = 1;
constexpr int kExitConfigError = 2;

int do_run(const std::string& scenario_arg, std::optional<std::uint64_t> seed,
           bool deterministic, const std::string& out_dir) {
    const riskplan::Scenario scenario = riskplan::resolve_scenario(scenario_arg);
    riskplan::RunOptions options;
    options.deterministic = deterministic;
    options.seed_override = seed;

    const riskplan::EpisodeTrace trace = riskplan::run_scenario(scenario, options);
    const std::uint64_t used_seed = seed.value_or(scenario.seed);
    riskplan::write_trace_files(trace, out_dir, scenario.id, used_seed);

    std::cout << "scenario " << scenario.id << ": " << riskplan::to_string(trace.status)
              << ", " << trace.steps.size() << " steps, " << trace.trigger_count
              << " triggers, path length " << trace.path_length() << "\n";
    std::cout << "trace written to " << out_dir << "\n";
    return trace.status == riskplan::EpisodeStatus::GoalReached ? kExitSuccess
                                                                : kExitPlannerFailure;
}

int do_export(const std::string& scenario_arg, const std::string& what, double resolution,
              const std::string& out_dir) {
    const riskplan::Scenario scenario = riskplan::resolve_scenario(scenario_arg);
    const riskplan::FieldKind kind = riskplan::field_kind_from_string(what);

    std::vector<riskplan::Vec2> points;
    std::vector<double> values;
    const std::filesystem::path dataset_path = std::filesystem::path(out_dir) / "dataset.csv";
    if (std::filesystem::exists(dataset_path)) {
        riskplan::read_dataset_csv(dataset_path.string(), points, values);
    } else if (kind == riskplan::FieldKind::PosteriorMean ||
               kind == riskplan::FieldKind::PosteriorCvar) {
        std::cerr << "error: posterior exports need a prior run: " << dataset_path
                  << " not found\n";
        return kExitConfigError;
    }

    const std::string csv =
        riskplan::export_field_csv(scenario, kind, resolution, points, values);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path out_path =
        std::filesystem::path(out_dir) / ("field_" + what + ".csv");
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kExitPlannerFailure;
    }
    out << csv;
    std::cout << "field '" << what << "' written to " << out_path.string() << "\n";
    return kExitSuccess;
}

int do_verify(std::uint64_t seed, std::size_t mc_samples) {
    const auto results = riskplan::verify::run_all(seed, mc_samples);
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  measured "
                  << r.measured << "  tolerance " << r.tolerance << "\n";
        all_pass = all_pass && r.pass;
    }
    std::cout << (all_pass ? "verification passed" : "verification FAILED") << "\n";
    return all_pass ? kExitSuccess : kExitPlannerFailure;
}

int do_list() {
    for (const std::string& name : riskplan::bundled_scenario_names()) {
        const riskplan::Scenario s = riskplan::bundled_scenario(name);
        std::cout << name << ": "
                  << (s.planner == riskplan::PlannerChoice::Graph ? "graph" : "smooth")
                  << " planner, alpha " << s.constraint.alpha << ", beta "
                  << s.constraint.metric.beta << ", " << s.world.sources.size()
                  << " source(s), " << s.world.obstacles.size() << " obstacle(s)\n";
    }
    return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"risk-aware online motion planning in unknown hazard fields"};
    app.require_subcommand(1);

    std::string scenario_arg;
    std::string out_dir = "out";
    std::string what = "truth";
    double resolution = 0.25;
    std::uint64_t seed_value = 0;
    bool seed_given = false;
    bool deterministic = false;
    std::uint64_t verify_seed = 1234;
    std::size_t mc_samples = 10'000'000;

    CLI::App* run = app.add_subcommand("run", "run a scenario episode and write its trace");
    run->add_option("--scenario", scenario_arg, "bundled name (fig2|fig3|trivial) or JSON path")
        ->required();
    run->add_option("--seed", seed_value, "override the scenario seed")
        ->each([&](const std::string&) { seed_given = true; });
    run->add_flag("--deterministic", deterministic,
                  "iteration-count planning budgets instead of wall clock");
    run->add_option("--out", out_dir, "output directory");

    CLI::App* exp = app.add_subcommand("export-field", "write a field grid as CSV");
    exp->add_option("--scenario", scenario_arg, "bundled name or JSON path")->required();
    exp->add_option("--what", what, "truth|posterior-mean|posterior-cvar|cost");
    exp->add_option("--resolution", resolution, "grid resolution in environment units");
    exp->add_option("--out", out_dir, "output directory (dataset.csv is read from here)");

    CLI::App* ver = app.add_subcommand("verify", "run the independent verification oracles");
    ver->add_option("--seed", verify_seed, "oracle seed");
    ver->add_option("--mc-samples", mc_samples, "Monte Carlo sample count");

    app.add_subcommand("list-scenarios", "list the bundled scenarios");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return do_run(scenario_arg,
                          seed_given ? std::optional<std::uint64_t>(seed_value) : std::nullopt,
                          deterministic, out_dir);
        }
        if (exp->parsed()) {
            return do_export(scenario_arg, what, resolution, out_dir);
        }
        if (ver->parsed()) {
            return do_verify(verify_seed, mc_samples);
        }
        return do_list();
    } catch (const riskplan::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPlannerFailure;
    }
}
