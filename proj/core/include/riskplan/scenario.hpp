#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskplan/constraint.hpp"
#include "riskplan/graph_planner.hpp"
#include "riskplan/smooth_planner.hpp"
#include "riskplan/world.hpp"

namespace riskplan {

/// Malformed scenario configuration; the message carries the offending
/// field path or parse location.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PlannerChoice { Graph, Smooth };

struct GraphPlannerConfig {
    double budget_seconds = 3.0;      // real-time mode
    int deterministic_batches = 4;    // deterministic mode
    GraphPlannerParams params;
    double step_length = 0.25;
    TriggerConfig trigger;
    int max_steps = 0;
};

struct SmoothPlannerConfig {
    IgpEpisodeOptions options;
};

/// A complete, reproducible episode description.
struct Scenario {
    std::string id;
    WorldConfig world;
    RiskConstraint constraint;
    Kernel kernel;
    Vec2 start;
    GoalRegion goal{Circle{{19.0, 19.0}, 1.0}};
    PlannerChoice planner = PlannerChoice::Graph;
    GraphPlannerConfig graph;
    SmoothPlannerConfig smooth;
    std::uint64_t seed = 1;
};

Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& scenario);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

/// Scenarios shipped with the project: "fig2", "fig3", "trivial".
std::vector<std::string> bundled_scenario_names();
Scenario bundled_scenario(const std::string& name);

/// Resolves a --scenario argument: a bundled name or a path to a JSON file.
Scenario resolve_scenario(const std::string& name_or_path);

struct RunOptions {
    bool deterministic = true;  // iteration-count budgets instead of wall clock
    std::optional<std::uint64_t> seed_override;
    bool measure_cold_solves = false;
};

/// Runs the scenario's episode end to end.
EpisodeTrace run_scenario(const Scenario& scenario, const RunOptions& options = {});

enum class FieldKind { Truth, PosteriorMean, PosteriorCvar, Cost };

FieldKind field_kind_from_string(const std::string& name);

/// Rectangular grid of the requested field as CSV: header row of
/// x-coordinates, one row per y-coordinate. Posterior and cost fields are
/// evaluated against a model built from the given dataset (empty dataset:
/// the prior).
std::string export_field_csv(const Scenario& scenario, FieldKind kind, double resolution,
                             const std::vector<Vec2>& dataset_points = {},
                             const std::vector<double>& dataset_values = {});

}  // namespace riskplan
