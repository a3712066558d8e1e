#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskplan/geometry.hpp"
#include "riskplan/trajectory.hpp"

namespace riskplan {

enum class EpisodeStatus { GoalReached, Timeout, PlannerFailed };

std::string to_string(EpisodeStatus status);

/// Per-step optimizer diagnostics (incremental planner only).
struct OptRecord {
    int iterations = 0;
    double final_cost = 0.0;
    double lambda = 0.0;
    bool diverged = false;
    /// Iterations of a cold re-solve of the same problem; -1 when not measured.
    int cold_iterations = -1;
};

struct StepRecord {
    int step = 0;
    std::vector<double> state;  // [x, y] or [x, y, theta]
    double observation = 0.0;
    int plan_id = -1;  // -1 before the first plan
    bool trigger = false;
    double true_hazard = 0.0;
    std::optional<OptRecord> opt;
};

/// Full episode output: the traversed steps, every plan committed to, the
/// final GP dataset, and wall-clock timings. The deterministic artifacts
/// (steps, plans, dataset) serialize separately from the timing metadata so
/// that traces are byte-identical across runs in deterministic mode.
struct EpisodeTrace {
    std::vector<StepRecord> steps;
    std::vector<Trajectory> plans;  // plan id is the index
    std::vector<Vec2> dataset_points;
    std::vector<double> dataset_values;
    EpisodeStatus status = EpisodeStatus::GoalReached;
    int trigger_count = 0;
    double wall_seconds = 0.0;
    double planning_seconds = 0.0;

    double path_length() const;
};

/// Line-delimited step records (one JSON object per line).
std::string trace_to_jsonl(const EpisodeTrace& trace);

/// Line-delimited plans: {"plan": id, "waypoints": [[x, y], ...]}.
std::string plans_to_jsonl(const EpisodeTrace& trace);

/// Final GP dataset as CSV rows "x1,x2,z" with a header.
std::string dataset_to_csv(const EpisodeTrace& trace);

/// Non-deterministic run metadata (status, counts, timings) as JSON.
std::string meta_to_json(const EpisodeTrace& trace, const std::string& scenario_id,
                         std::uint64_t seed);

/// Writes trace.jsonl, plans.jsonl, dataset.csv and meta.json into out_dir.
void write_trace_files(const EpisodeTrace& trace, const std::string& out_dir,
                       const std::string& scenario_id, std::uint64_t seed);

/// Reads a dataset.csv produced by write_trace_files.
void read_dataset_csv(const std::string& path, std::vector<Vec2>& points,
                      std::vector<double>& values);

}  // namespace riskplan
