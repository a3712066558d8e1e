#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "riskplan/constraint.hpp"
#include "riskplan/trace.hpp"
#include "riskplan/trajectory.hpp"
#include "riskplan/world.hpp"

namespace riskplan {

/// Line integral of the risk cost along the segment a->b, composite
/// trapezoidal rule at the given arc-length step. Never below the Euclidean
/// segment length since the integrand is >= 1.
double edge_cost(const RiskConstraint& c, const GpModel& model, Vec2 a, Vec2 b,
                 double step = 0.1);

/// Admissible cost-to-go bound: Euclidean distance to the goal region.
double heuristic(Vec2 a, const GoalRegion& goal);

struct PlanBudget {
    enum class Mode { WallClock, Batches };
    Mode mode = Mode::Batches;
    double seconds = 3.0;  // real-time mode
    int batches = 4;       // deterministic mode
};

struct PlanQuery {
    Vec2 start;
    GoalRegion goal;
    PlanBudget budget;
};

struct GraphPlannerParams {
    int batch_size = 100;
    double rgg_tuning = 1.5;       // scale on the (log n / n)^{1/d} radius
    double edge_step = 0.1;        // quadrature step for edge costs
    int goal_samples_per_batch = 5;
};

struct PlanStats {
    int samples = 0;
    int edges_evaluated = 0;
    int batches = 0;
};

struct PlanResult {
    std::optional<Trajectory> trajectory;
    double cost = std::numeric_limits<double>::infinity();
    /// Incumbent cost after each batch that held a solution; nonincreasing.
    std::vector<double> incumbent_costs;
    PlanStats stats;
};

/// Anytime batch-sampling planner: informed batches over an RGG-style graph,
/// a heuristic-guided edge queue, and lazy edge evaluation (collision and
/// quadrature costs computed only when an edge is popped, then cached).
/// Each plan() call searches from scratch against the supplied frozen model.
class GraphPlanner {
public:
    GraphPlanner(const World& world, RiskConstraint constraint, GraphPlannerParams params);

    /// Best trajectory found within budget, or nullopt when no feasible
    /// trajectory was found. Throws std::domain_error if the start lies
    /// outside free space.
    PlanResult plan(const PlanQuery& query, const GpModel& model, Rng& rng) const;

private:
    const World& world_;
    RiskConstraint constraint_;
    GraphPlannerParams params_;
};

struct TriggerConfig {
    double beta_prime = 0.01;  // extreme-tail level, must stay below the metric's beta
    int stride = 1;            // check every m-th waypoint ahead

    void validate(double beta) const;
};

/// Replanning trigger: true iff some waypoint ahead of the agent has a
/// current risk at level beta exceeding its planning-time risk at the
/// extreme-tail level beta'.
bool check_trigger(std::span<const Vec2> waypoints_ahead, const GpModel& model_at_plan,
                   const GpModel& model_now, const RiskConstraint& constraint,
                   const TriggerConfig& cfg);

struct GraphEpisodeOptions {
    double step_length = 0.25;  // move granularity along committed plans
    TriggerConfig trigger;
    GraphPlannerParams planner;
    int max_steps = 0;          // 0: 10 * bounds diameter / step_length
    int budget_retries = 2;     // budget doublings after a failed plan
};

/// Online episode: plan, commit, move one waypoint at a time while sampling
/// the field, replan whenever the event trigger fires, stop in the goal
/// region or at the step cutoff.
EpisodeTrace run_episode(const World& world, const PlanQuery& query,
                         const RiskConstraint& constraint, const Kernel& kernel,
                         const GraphEpisodeOptions& options, Rng& rng);

}  // namespace riskplan
