#include "riskplan/smooth_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

#include <Eigen/Dense>

namespace riskplan {

void FactorWeights::validate() const {
    if (!(smoothness > 0.0 && sigma_obs > 0.0 && sigma_risk > 0.0 && epsilon_obs > 0.0)) {
        throw std::invalid_argument("FactorWeights: all weights must be positive");
    }
}

double obstacle_residual(const World& world, Vec2 x, double epsilon_obs) {
    return std::max(epsilon_obs - world.signed_distance(x), 0.0);
}

double risk_residual(const RiskConstraint& c, const GpModel& model, Vec2 x) {
    const double margin = phi(c, model, x);
    if (margin >= 0.0) {
        return 0.0;
    }
    const double exponent = std::min(-c.gamma * margin, 700.0);
    return std::expm1(exponent);
}

FactorGraphProblem FactorGraphProblem::from_trajectory(const Trajectory& traj, int dof) {
    if (dof != 2 && dof != 3) {
        throw std::invalid_argument("FactorGraphProblem: dof must be 2 or 3");
    }
    if (traj.size() < 2) {
        throw std::invalid_argument("FactorGraphProblem: needs at least 2 states");
    }
    FactorGraphProblem p;
    p.dof_ = dof;
    p.num_states_ = static_cast<int>(traj.size());
    p.values_.resize(static_cast<std::size_t>(p.num_states_) * dof);
    p.frozen_.assign(static_cast<std::size_t>(p.num_states_), false);

    const auto& wps = traj.waypoints();
    for (int i = 0; i < p.num_states_; ++i) {
        p.set_position(i, wps[static_cast<std::size_t>(i)]);
    }
    if (dof == 3) {
        if (traj.has_headings()) {
            for (int i = 0; i < p.num_states_; ++i) {
                p.set_heading(i, traj.headings()[static_cast<std::size_t>(i)]);
            }
        } else {
            // seed headings from segment directions, continuous (unwrapped)
            double prev = 0.0;
            for (int i = 0; i < p.num_states_; ++i) {
                double theta = prev;
                if (i + 1 < p.num_states_) {
                    const Vec2 d = wps[static_cast<std::size_t>(i) + 1] -
                                   wps[static_cast<std::size_t>(i)];
                    if (d.norm() > 1e-12) {
                        theta = std::atan2(d.y, d.x);
                        while (theta - prev > std::numbers::pi) theta -= 2.0 * std::numbers::pi;
                        while (theta - prev < -std::numbers::pi) theta += 2.0 * std::numbers::pi;
                    }
                }
                p.set_heading(i, theta);
                prev = theta;
            }
        }
    }
    // endpoints are anchored by construction
    p.frozen_.front() = true;
    p.frozen_.back() = true;
    return p;
}

Vec2 FactorGraphProblem::position(int i) const {
    const auto base = static_cast<std::size_t>(i) * dof_;
    return {values_[base], values_[base + 1]};
}

double FactorGraphProblem::heading(int i) const {
    if (dof_ < 3) {
        return 0.0;
    }
    return values_[static_cast<std::size_t>(i) * dof_ + 2];
}

void FactorGraphProblem::set_position(int i, Vec2 p) {
    const auto base = static_cast<std::size_t>(i) * dof_;
    values_[base] = p.x;
    values_[base + 1] = p.y;
}

void FactorGraphProblem::set_heading(int i, double theta) {
    if (dof_ < 3) {
        return;
    }
    values_[static_cast<std::size_t>(i) * dof_ + 2] = theta;
}

void FactorGraphProblem::fix_factors(int index) {
    if (index < 0 || index >= num_states_) {
        throw std::out_of_range("FactorGraphProblem::fix_factors: index out of range");
    }
    frozen_[static_cast<std::size_t>(index)] = true;
}

int FactorGraphProblem::frozen_count() const {
    return static_cast<int>(std::count(frozen_.begin(), frozen_.end(), true));
}

Trajectory FactorGraphProblem::to_trajectory() const {
    std::vector<Vec2> wps(static_cast<std::size_t>(num_states_));
    for (int i = 0; i < num_states_; ++i) {
        wps[static_cast<std::size_t>(i)] = position(i);
    }
    std::vector<double> hds;
    if (dof_ == 3) {
        hds.resize(static_cast<std::size_t>(num_states_));
        for (int i = 0; i < num_states_; ++i) {
            hds[static_cast<std::size_t>(i)] = heading(i);
        }
    }
    return Trajectory(std::move(wps), std::move(hds));
}

namespace {

struct Residuals {
    Eigen::VectorXd r;
    double cost = 0.0;  // 0.5 * ||r||^2
};

// LM trial steps can momentarily leave the world; GP queries are clamped to
// the bounds while the bounds hinge of the signed distance pulls states back.
Vec2 clamp_to_bounds(const Rect& bounds, Vec2 p) {
    return {std::clamp(p.x, bounds.min.x, bounds.max.x),
            std::clamp(p.y, bounds.min.y, bounds.max.y)};
}

struct ProblemLayout {
    int dof;
    int num_states;
    std::vector<int> free_states;       // indices of unfrozen states
    std::vector<int> column_of_state;   // first Jacobian column, -1 if frozen
    int num_smooth_rows;
    int num_rows;

    explicit ProblemLayout(const FactorGraphProblem& p) {
        dof = p.dof();
        num_states = p.num_states();
        column_of_state.assign(static_cast<std::size_t>(num_states), -1);
        for (int i = 0; i < num_states; ++i) {
            if (!p.is_frozen(i)) {
                column_of_state[static_cast<std::size_t>(i)] =
                    static_cast<int>(free_states.size()) * dof;
                free_states.push_back(i);
            }
        }
        num_smooth_rows = std::max(0, num_states - 2) * dof;
        num_rows = num_smooth_rows + 2 * num_states;  // + obstacle + risk rows
    }
    int num_cols() const { return static_cast<int>(free_states.size()) * dof; }
};

Residuals compute_residuals(const FactorGraphProblem& p, const ProblemLayout& layout,
                            const World& world, const GpModel& model,
                            const RiskConstraint& constraint, const FactorWeights& w) {
    Residuals out;
    out.r.setZero(layout.num_rows);
    const double sw = std::sqrt(w.smoothness);
    int row = 0;
    for (int i = 1; i + 1 < layout.num_states; ++i) {
        for (int k = 0; k < layout.dof; ++k) {
            const auto idx = [&](int s) {
                return static_cast<std::size_t>(s) * layout.dof + static_cast<std::size_t>(k);
            };
            const auto& v = p.raw_values();
            out.r[row++] = sw * (v[idx(i - 1)] - 2.0 * v[idx(i)] + v[idx(i + 1)]);
        }
    }
    for (int i = 0; i < layout.num_states; ++i) {
        out.r[row++] = obstacle_residual(world, p.position(i), w.epsilon_obs) / w.sigma_obs;
    }
    for (int i = 0; i < layout.num_states; ++i) {
        const Vec2 x = clamp_to_bounds(world.bounds(), p.position(i));
        out.r[row++] = risk_residual(constraint, model, x) / w.sigma_risk;
    }
    out.cost = 0.5 * out.r.squaredNorm();
    return out;
}

Eigen::MatrixXd compute_jacobian(const FactorGraphProblem& p, const ProblemLayout& layout,
                                 const World& world, const GpModel& model,
                                 const RiskConstraint& constraint, const FactorWeights& w) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(layout.num_rows, layout.num_cols());
    const double sw = std::sqrt(w.smoothness);
    int row = 0;
    for (int i = 1; i + 1 < layout.num_states; ++i) {
        const int stencil[3] = {i - 1, i, i + 1};
        const double coeff[3] = {sw, -2.0 * sw, sw};
        for (int k = 0; k < layout.dof; ++k) {
            for (int s = 0; s < 3; ++s) {
                const int col = layout.column_of_state[static_cast<std::size_t>(stencil[s])];
                if (col >= 0) {
                    jac(row, col + k) += coeff[s];
                }
            }
            ++row;
        }
    }
    for (int i = 0; i < layout.num_states; ++i, ++row) {
        const int col = layout.column_of_state[static_cast<std::size_t>(i)];
        if (col < 0) {
            continue;
        }
        const Vec2 x = p.position(i);
        if (obstacle_residual(world, x, w.epsilon_obs) > 0.0) {
            const Vec2 grad = world.signed_distance_gradient(x);
            jac(row, col) = -grad.x / w.sigma_obs;
            jac(row, col + 1) = -grad.y / w.sigma_obs;
        }
    }
    for (int i = 0; i < layout.num_states; ++i, ++row) {
        const int col = layout.column_of_state[static_cast<std::size_t>(i)];
        if (col < 0) {
            continue;
        }
        const Vec2 x = clamp_to_bounds(world.bounds(), p.position(i));
        const Vec2 grad = cost_gradient(constraint, model, x);
        jac(row, col) = grad.x / w.sigma_risk;
        jac(row, col + 1) = grad.y / w.sigma_risk;
    }
    return jac;
}

void apply_step(FactorGraphProblem& p, const ProblemLayout& layout,
                const Eigen::VectorXd& delta) {
    for (std::size_t fi = 0; fi < layout.free_states.size(); ++fi) {
        const int i = layout.free_states[fi];
        const int col = static_cast<int>(fi) * layout.dof;
        Vec2 pos = p.position(i);
        pos.x += delta[col];
        pos.y += delta[col + 1];
        p.set_position(i, pos);
        if (layout.dof == 3) {
            p.set_heading(i, p.heading(i) + delta[col + 2]);
        }
    }
}

}  // namespace

OptimizeResult optimize(FactorGraphProblem& problem, const World& world,
                        const GpModel& model, const RiskConstraint& constraint,
                        const FactorWeights& weights, const OptimizeOptions& options) {
    weights.validate();
    constraint.validate();

    const ProblemLayout layout(problem);
    OptimizeResult result;

    Residuals current = compute_residuals(problem, layout, world, model, constraint, weights);
    result.initial_cost = current.cost;
    result.accepted_costs.push_back(current.cost);

    if (layout.num_cols() == 0) {
        // everything frozen: nothing to do
        result.final_cost = current.cost;
        result.trajectory = problem.to_trajectory();
        return result;
    }

    double lambda = options.lambda_init;
    FactorGraphProblem best = problem;
    double best_cost = current.cost;
    double last_change = std::numeric_limits<double>::infinity();

    for (int round = 0; round < options.max_iterations; ++round) {
        const Eigen::MatrixXd jac =
            compute_jacobian(problem, layout, world, model, constraint, weights);
        const Eigen::VectorXd gradient = jac.transpose() * current.r;
        const bool gradient_flat = gradient.lpNorm<Eigen::Infinity>() < options.gradient_tol;
        // converged: flat gradient and the last accepted step changed the
        // cost only negligibly (or none was needed at all)
        if (gradient_flat &&
            (result.iterations == 0 || last_change <= 1e-12 * (1.0 + current.cost))) {
            break;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;

        bool accepted = false;
        int rejects = 0;
        while (!accepted) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal().array() += lambda + 1e-12;
            const Eigen::VectorXd delta = damped.ldlt().solve(-gradient);

            FactorGraphProblem trial = problem;
            apply_step(trial, layout, delta);
            const Residuals trial_res =
                compute_residuals(trial, layout, world, model, constraint, weights);
            if (trial_res.cost < current.cost) {
                last_change = current.cost - trial_res.cost;
                problem = std::move(trial);
                current = trial_res;
                result.accepted_costs.push_back(current.cost);
                result.iterations += 1;  // accepted parameter updates
                lambda = std::max(lambda / options.lambda_factor, 1e-12);
                accepted = true;
                if (current.cost < best_cost) {
                    best = problem;
                    best_cost = current.cost;
                }
            } else {
                lambda *= options.lambda_factor;
                if (++rejects >= options.max_consecutive_rejects) {
                    // a stall at a flat gradient is convergence, not divergence
                    result.diverged = !gradient_flat;
                    break;
                }
            }
        }
        if (!accepted) {
            break;  // return the best iterate with the warning flag
        }
    }

    if (result.diverged && best_cost < current.cost) {
        problem = best;
        current.cost = best_cost;
    }
    result.final_cost = current.cost;
    result.final_lambda = lambda;
    result.trajectory = problem.to_trajectory();
    return result;
}

namespace {

struct AStarNode {
    double f;
    int index;
    bool operator>(const AStarNode& other) const { return f > other.f; }
};

std::optional<std::vector<Vec2>> grid_astar(Vec2 start, Vec2 goal, const World& world) {
    const SignedDistanceGrid& sdf = world.sdf();
    const int nx = sdf.cols();
    const int ny = sdf.rows();
    const auto node_pos = [&](int ix, int iy) {
        return Vec2{sdf.origin().x + ix * sdf.cell_x(), sdf.origin().y + iy * sdf.cell_y()};
    };
    const auto nearest_free_node = [&](Vec2 p) -> int {
        int bix = std::clamp(static_cast<int>(std::round((p.x - sdf.origin().x) / sdf.cell_x())),
                             0, nx - 1);
        int biy = std::clamp(static_cast<int>(std::round((p.y - sdf.origin().y) / sdf.cell_y())),
                             0, ny - 1);
        // spiral outwards until a free node is found
        for (int radius = 0; radius < std::max(nx, ny); ++radius) {
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    if (std::max(std::abs(dx), std::abs(dy)) != radius) {
                        continue;
                    }
                    const int ix = bix + dx;
                    const int iy = biy + dy;
                    if (ix < 0 || iy < 0 || ix >= nx || iy >= ny) {
                        continue;
                    }
                    if (world.in_free_space(node_pos(ix, iy))) {
                        return iy * nx + ix;
                    }
                }
            }
        }
        return -1;
    };

    const int start_node = nearest_free_node(start);
    const int goal_node = nearest_free_node(goal);
    if (start_node < 0 || goal_node < 0) {
        return std::nullopt;
    }
    const Vec2 goal_pos = node_pos(goal_node % nx, goal_node / nx);

    const auto n_nodes = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    std::vector<double> g(n_nodes, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n_nodes, -1);
    std::priority_queue<AStarNode, std::vector<AStarNode>, std::greater<>> open;
    g[static_cast<std::size_t>(start_node)] = 0.0;
    open.push({distance(node_pos(start_node % nx, start_node / nx), goal_pos), start_node});

    const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
    const int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
    while (!open.empty()) {
        const AStarNode top = open.top();
        open.pop();
        if (top.index == goal_node) {
            break;
        }
        const int ix = top.index % nx;
        const int iy = top.index / nx;
        const Vec2 p = node_pos(ix, iy);
        const double gp = g[static_cast<std::size_t>(top.index)];
        if (top.f > gp + distance(p, goal_pos) + 1e-9) {
            continue;  // stale
        }
        for (int k = 0; k < 8; ++k) {
            const int jx = ix + dx8[k];
            const int jy = iy + dy8[k];
            if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) {
                continue;
            }
            const int j = jy * nx + jx;
            const Vec2 q = node_pos(jx, jy);
            if (!world.in_free_space(q) || !world.collision_free(p, q)) {
                continue;
            }
            const double cand = gp + distance(p, q);
            if (cand < g[static_cast<std::size_t>(j)]) {
                g[static_cast<std::size_t>(j)] = cand;
                parent[static_cast<std::size_t>(j)] = top.index;
                open.push({cand + distance(q, goal_pos), j});
            }
        }
    }
    if (!std::isfinite(g[static_cast<std::size_t>(goal_node)])) {
        return std::nullopt;
    }

    std::vector<Vec2> pts;
    for (int v = goal_node; v >= 0; v = parent[static_cast<std::size_t>(v)]) {
        pts.push_back(node_pos(v % nx, v / nx));
    }
    std::reverse(pts.begin(), pts.end());
    if (world.collision_free(start, pts.front())) {
        pts.insert(pts.begin(), start);
    }
    if (world.collision_free(pts.back(), goal)) {
        pts.push_back(goal);
    }
    return pts;
}

Trajectory resample_count(const Trajectory& traj, int count) {
    std::vector<Vec2> pts(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        pts[static_cast<std::size_t>(i)] =
            traj.sample(static_cast<double>(i) / (count - 1));
    }
    return Trajectory(std::move(pts));
}

}  // namespace

std::optional<Trajectory> initial_trajectory(Vec2 start, Vec2 goal, const World& world,
                                             int num_states) {
    if (num_states < 2) {
        throw std::invalid_argument("initial_trajectory: num_states must be >= 2");
    }
    if (!world.in_free_space(start) || !world.in_free_space(goal)) {
        return std::nullopt;
    }
    if (start == goal) {
        return Trajectory({start, goal});
    }
    if (world.collision_free(start, goal)) {
        return resample_count(Trajectory({start, goal}), num_states);
    }
    const auto path = grid_astar(start, goal, world);
    if (!path || path->size() < 2) {
        return std::nullopt;
    }
    return resample_count(Trajectory(*path), num_states);
}

namespace {

/// Cold seed: straight-line interpolation from the frozen head to the goal
/// anchor over the unfrozen states.
void reset_to_straight(FactorGraphProblem& p, int head) {
    const int last = p.num_states() - 1;
    const Vec2 from = p.position(head);
    const Vec2 to = p.position(last);
    const double theta_from = p.heading(head);
    const double theta_to = p.heading(last);
    for (int i = head + 1; i < last; ++i) {
        if (p.is_frozen(i)) {
            continue;
        }
        const double t = static_cast<double>(i - head) / (last - head);
        p.set_position(i, lerp(from, to, t));
        if (p.dof() == 3) {
            p.set_heading(i, theta_from + t * (theta_to - theta_from));
        }
    }
}

}  // namespace

EpisodeTrace run_episode_igp(const World& world, Vec2 start, Vec2 goal,
                             const RiskConstraint& constraint, const Kernel& kernel,
                             const IgpEpisodeOptions& options, Rng& rng) {
    constraint.validate();
    options.weights.validate();
    if (options.num_states < 2) {
        throw std::invalid_argument("run_episode_igp: num_states must be >= 2");
    }

    const auto episode_start = std::chrono::steady_clock::now();
    EpisodeTrace trace;
    Rng obs_rng = rng.fork(0x0b5e7fe1);

    GpModel model(kernel, world.sensor_noise_variance(), world.bounds());

    const auto seed = initial_trajectory(start, goal, world, options.num_states);
    if (!seed) {
        trace.status = EpisodeStatus::PlannerFailed;
        return trace;
    }
    const double spacing = seed->length() > 0.0
                               ? seed->length() / (options.num_states - 1)
                               : 1e-6;
    const double goal_radius = options.goal_radius > 0.0 ? options.goal_radius : spacing;
    const int max_steps =
        options.max_steps > 0
            ? options.max_steps
            : static_cast<int>(10.0 * world.bounds().diameter() / spacing) + options.num_states;

    FactorGraphProblem problem = FactorGraphProblem::from_trajectory(*seed, options.dof);

    Vec2 x = start;
    {
        const double z = world.observe(x, obs_rng);
        model.add_observation(x, z);
        std::vector<double> state{x.x, x.y};
        if (options.dof == 3) {
            state.push_back(problem.heading(0));
        }
        trace.steps.push_back({0, std::move(state), z, -1, false, world.hazard(x), std::nullopt});
    }

    int head = 0;
    int step = 0;
    double planning_seconds = 0.0;
    trace.status = EpisodeStatus::GoalReached;

    while (distance(x, goal) > goal_radius) {
        if (step >= max_steps || head + 1 >= problem.num_states()) {
            trace.status = EpisodeStatus::Timeout;
            break;
        }

        const auto t_plan = std::chrono::steady_clock::now();
        const OptimizeResult res =
            optimize(problem, world, model, constraint, options.weights, options.optimizer);
        planning_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_plan).count();

        OptRecord opt{res.iterations, res.final_cost, res.final_lambda, res.diverged, -1};
        if (options.measure_cold_solves) {
            FactorGraphProblem cold = problem;
            reset_to_straight(cold, head);
            const OptimizeResult cold_res =
                optimize(cold, world, model, constraint, options.weights, options.optimizer);
            opt.cold_iterations = cold_res.iterations;
        }

        const int plan_id = static_cast<int>(trace.plans.size());
        trace.plans.push_back(res.trajectory);

        ++head;
        x = problem.position(head);
        const double z = world.observe(x, obs_rng);
        model.add_observation(x, z);
        problem.fix_factors(head);
        ++step;

        std::vector<double> state{x.x, x.y};
        if (options.dof == 3) {
            state.push_back(problem.heading(head));
        }
        trace.steps.push_back(
            {step, std::move(state), z, plan_id, false, world.hazard(x), opt});
    }

    trace.dataset_points = model.points();
    trace.dataset_values = model.values();
    trace.planning_seconds = planning_seconds;
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - episode_start)
            .count();
    return trace;
}

}  // namespace riskplan
