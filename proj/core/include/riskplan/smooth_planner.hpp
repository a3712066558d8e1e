#pragma once

#include <optional>
#include <vector>

#include "riskplan/constraint.hpp"
#include "riskplan/trace.hpp"
#include "riskplan/trajectory.hpp"
#include "riskplan/world.hpp"

namespace riskplan {

struct FactorWeights {
    double smoothness = 10.0;
    double sigma_obs = 1.0;   // obstacle factor scale
    double sigma_risk = 1.0;  // risk factor scale
    double epsilon_obs = 0.5; // obstacle safety margin, environment-units

    void validate() const;
};

/// Hinge obstacle cost h(x) = max(epsilon_obs - signed_distance(x), 0).
double obstacle_residual(const World& world, Vec2 x, double epsilon_obs);

/// Risk factor residual f(x) - 1; zero exactly on the satisfied set and
/// continuous across the constraint boundary.
double risk_residual(const RiskConstraint& c, const GpModel& model, Vec2 x);

/// Discretized trajectory as an optimization problem: M states of 2 or 3
/// degrees of freedom (position, optional heading), a frozen set excluded
/// from updates, and endpoints anchored to start and goal.
class FactorGraphProblem {
public:
    static FactorGraphProblem from_trajectory(const Trajectory& traj, int dof);

    int dof() const { return dof_; }
    int num_states() const { return num_states_; }

    Vec2 position(int i) const;
    double heading(int i) const;
    void set_position(int i, Vec2 p);
    void set_heading(int i, double theta);

    /// Marks the state as traversed; optimize never moves it again.
    void fix_factors(int index);
    bool is_frozen(int index) const { return frozen_[static_cast<std::size_t>(index)]; }
    int frozen_count() const;

    Trajectory to_trajectory() const;

    const std::vector<double>& raw_values() const { return values_; }

private:
    int dof_ = 2;
    int num_states_ = 0;
    std::vector<double> values_;
    std::vector<bool> frozen_;
};

struct OptimizeOptions {
    int max_iterations = 100;
    double gradient_tol = 1e-6;
    // small initial damping: near-quadratic problems get full Gauss-Newton
    // steps immediately, rejections escalate it where the field is wild
    double lambda_init = 1e-6;
    double lambda_factor = 10.0;
    int max_consecutive_rejects = 10;
};

struct OptimizeResult {
    Trajectory trajectory;
    int iterations = 0;
    double initial_cost = 0.0;
    double final_cost = 0.0;
    double final_lambda = 0.0;
    bool diverged = false;
    /// Total factor cost after each accepted step, starting from the initial
    /// cost; nonincreasing by the damping contract.
    std::vector<double> accepted_costs;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) minimization of the factor
/// costs: smoothness (second differences), obstacle hinge, risk residual,
/// with anchors and frozen states held fixed. Warm-started: the problem's
/// current values are the initial iterate and are updated in place.
OptimizeResult optimize(FactorGraphProblem& problem, const World& world,
                        const GpModel& model, const RiskConstraint& constraint,
                        const FactorWeights& weights, const OptimizeOptions& options = {});

/// Collision-free seed trajectory with num_states waypoints: the straight
/// line when feasible, otherwise a grid A* path over the free cells of the
/// signed-distance grid. Returns nullopt when no path exists.
std::optional<Trajectory> initial_trajectory(Vec2 start, Vec2 goal, const World& world,
                                             int num_states);

struct IgpEpisodeOptions {
    int num_states = 50;
    int dof = 2;  // 3 adds a heading component with smoothness only
    FactorWeights weights;
    OptimizeOptions optimizer;
    double goal_radius = 0.0;  // 0: inter-state spacing of the seed trajectory
    int max_steps = 0;         // 0: 10 * bounds diameter / spacing
    /// When set, each re-solve is also run cold (from the straight-line seed)
    /// purely for diagnostics; iteration counts land in the trace.
    bool measure_cold_solves = false;
};

/// Online incremental episode: optimize warm-started from the previous
/// solution, move one support state, sample the field, freeze the traversed
/// state, repeat until the goal disc is reached.
EpisodeTrace run_episode_igp(const World& world, Vec2 start, Vec2 goal,
                             const RiskConstraint& constraint, const Kernel& kernel,
                             const IgpEpisodeOptions& options, Rng& rng);

}  // namespace riskplan
