#include "riskplan/graph_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace riskplan {

double edge_cost(const RiskConstraint& c, const GpModel& model, Vec2 a, Vec2 b,
                 double step) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("edge_cost: step must be positive");
    }
    const double len = distance(a, b);
    if (len == 0.0) {
        return 0.0;
    }
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    const double ds = len / n;
    double sum = 0.5 * (cost(c, model, a) + cost(c, model, b));
    for (int i = 1; i < n; ++i) {
        sum += cost(c, model, lerp(a, b, static_cast<double>(i) / n));
    }
    return sum * ds;
}

double heuristic(Vec2 a, const GoalRegion& goal) { return goal_distance(goal, a); }

void TriggerConfig::validate(double beta) const {
    if (!(beta_prime > 0.0 && beta_prime < beta)) {
        throw std::invalid_argument("TriggerConfig: beta' must lie in (0, beta)");
    }
    if (stride < 1) {
        throw std::invalid_argument("TriggerConfig: stride must be >= 1");
    }
}

bool check_trigger(std::span<const Vec2> waypoints_ahead, const GpModel& model_at_plan,
                   const GpModel& model_now, const RiskConstraint& constraint,
                   const TriggerConfig& cfg) {
    const RiskMetric metric_now = constraint.metric;
    const RiskMetric metric_plan = constraint.metric.with_beta(cfg.beta_prime);
    for (std::size_t i = 0; i < waypoints_ahead.size();
         i += static_cast<std::size_t>(cfg.stride)) {
        const Vec2 x = waypoints_ahead[i];
        const double risk_now = apply(metric_now, model_now.posterior(x));
        const double risk_plan = apply(metric_plan, model_at_plan.posterior(x));
        if (risk_now > risk_plan) {
            return true;
        }
    }
    return false;
}

namespace {

struct EdgeInfo {
    bool collision_checked = false;
    bool free = false;
    bool costed = false;
    double cost = 0.0;
};

std::uint64_t edge_key(int i, int j) {
    if (i > j) std::swap(i, j);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
           static_cast<std::uint32_t>(j);
}

struct QueueEntry {
    double key;
    double g_at_push;
    int from;
    int to;
    bool operator>(const QueueEntry& other) const { return key > other.key; }
};

double rgg_radius(std::size_t n, double free_area, double tuning, double cap) {
    if (n < 2) {
        return cap;
    }
    constexpr double d = 2.0;
    const double gamma =
        2.0 * std::pow(1.0 + 1.0 / d, 1.0 / d) * std::sqrt(free_area / std::numbers::pi);
    const double nn = static_cast<double>(n);
    return std::min(cap, tuning * gamma * std::sqrt(std::log(nn) / nn));
}

Vec2 sample_in_goal(const GoalRegion& goal, Rng& rng) {
    if (std::holds_alternative<Circle>(goal)) {
        const Circle& c = std::get<Circle>(goal);
        const double r = c.radius * std::sqrt(rng.uniform01());
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        return {c.center.x + r * std::cos(a), c.center.y + r * std::sin(a)};
    }
    const Rect& r = std::get<Rect>(goal);
    return {rng.uniform(r.min.x, r.max.x), rng.uniform(r.min.y, r.max.y)};
}

}  // namespace

GraphPlanner::GraphPlanner(const World& world, RiskConstraint constraint,
                           GraphPlannerParams params)
    : world_(world), constraint_(std::move(constraint)), params_(params) {
    constraint_.validate();
    if (params_.batch_size < 1) {
        throw std::invalid_argument("GraphPlanner: batch_size must be >= 1");
    }
}

PlanResult GraphPlanner::plan(const PlanQuery& query, const GpModel& model,
                              Rng& rng) const {
    if (!world_.in_free_space(query.start)) {
        throw std::domain_error("GraphPlanner::plan: start outside free space");
    }

    PlanResult result;
    if (goal_contains(query.goal, query.start)) {
        result.trajectory = Trajectory({query.start, query.start});
        result.cost = 0.0;
        result.incumbent_costs.push_back(0.0);
        return result;
    }

    std::vector<Vec2> samples{query.start};
    std::vector<bool> is_goal{false};
    std::unordered_map<std::uint64_t, EdgeInfo> edges;

    double c_best = std::numeric_limits<double>::infinity();
    std::vector<Vec2> incumbent;  // extracted when the incumbent improves
    std::vector<double> g;
    std::vector<int> parent;

    const double diameter = world_.bounds().diameter();
    const auto informed_ok = [&](Vec2 x) {
        if (!std::isfinite(c_best)) {
            return true;
        }
        return distance(query.start, x) + goal_distance(query.goal, x) <= c_best;
    };

    const auto add_samples = [&]() {
        int added = 0;
        int attempts = 0;
        const int max_attempts = 200 * params_.batch_size;
        while (added < params_.batch_size && attempts < max_attempts) {
            ++attempts;
            const Vec2 x{rng.uniform(world_.bounds().min.x, world_.bounds().max.x),
                         rng.uniform(world_.bounds().min.y, world_.bounds().max.y)};
            if (!world_.in_free_space(x) || !informed_ok(x)) {
                continue;
            }
            samples.push_back(x);
            is_goal.push_back(goal_contains(query.goal, x));
            ++added;
        }
        for (int k = 0; k < params_.goal_samples_per_batch; ++k) {
            const Vec2 x = sample_in_goal(query.goal, rng);
            if (world_.in_free_space(x) && informed_ok(x)) {
                samples.push_back(x);
                is_goal.push_back(true);
            }
        }
    };

    // One batch: grow the sample set, then run a heuristic-guided edge-queue
    // search with lazy edge evaluation against the cached edge table.
    const auto run_batch = [&]() {
        add_samples();
        const double radius =
            rgg_radius(samples.size(), world_.free_measure(), params_.rgg_tuning, diameter);
        const auto n = samples.size();
        g.assign(n, std::numeric_limits<double>::infinity());
        parent.assign(n, -1);
        g[0] = 0.0;

        std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> queue;
        const auto push_out_edges = [&](int v) {
            for (std::size_t w = 0; w < n; ++w) {
                const int wi = static_cast<int>(w);
                if (wi == v) {
                    continue;
                }
                const double dist = distance(samples[static_cast<std::size_t>(v)], samples[w]);
                if (dist > radius) {
                    continue;
                }
                if (g[static_cast<std::size_t>(v)] + dist >= g[w]) {
                    continue;  // cannot improve w even with the lower bound
                }
                const auto it = edges.find(edge_key(v, wi));
                if (it != edges.end() && it->second.collision_checked && !it->second.free) {
                    continue;
                }
                const double key = g[static_cast<std::size_t>(v)] + dist +
                                   heuristic(samples[w], query.goal);
                if (key >= c_best) {
                    continue;
                }
                queue.push({key, g[static_cast<std::size_t>(v)], v, wi});
            }
        };
        push_out_edges(0);

        while (!queue.empty()) {
            const QueueEntry e = queue.top();
            queue.pop();
            if (e.key >= c_best) {
                break;  // nothing left can improve the incumbent
            }
            const auto vi = static_cast<std::size_t>(e.from);
            const auto wi = static_cast<std::size_t>(e.to);
            if (e.g_at_push > g[vi]) {
                continue;  // stale entry
            }
            const double dist = distance(samples[vi], samples[wi]);
            if (g[vi] + dist >= g[wi]) {
                continue;
            }

            EdgeInfo& info = edges[edge_key(e.from, e.to)];
            if (!info.collision_checked) {
                info.collision_checked = true;
                info.free = world_.collision_free(samples[vi], samples[wi]);
            }
            if (!info.free) {
                continue;
            }
            if (!info.costed) {
                info.costed = true;
                info.cost = edge_cost(constraint_, model, samples[vi], samples[wi],
                                      params_.edge_step);
                ++result.stats.edges_evaluated;
            }
            if (g[vi] + info.cost < g[wi]) {
                g[wi] = g[vi] + info.cost;
                parent[wi] = e.from;
                if (is_goal[wi] && g[wi] < c_best) {
                    c_best = g[wi];
                    // parents are consistent right now; later batches reset them
                    incumbent.clear();
                    for (int v = e.to; v >= 0; v = parent[static_cast<std::size_t>(v)]) {
                        incumbent.push_back(samples[static_cast<std::size_t>(v)]);
                    }
                    std::reverse(incumbent.begin(), incumbent.end());
                }
                push_out_edges(e.to);
            }
        }
    };

    const PlanBudget& budget = query.budget;
    const auto t0 = std::chrono::steady_clock::now();
    int batch = 0;
    constexpr int kMaxWallClockBatches = 10000;
    while (true) {
        if (budget.mode == PlanBudget::Mode::Batches) {
            if (batch >= budget.batches) {
                break;
            }
        } else if (batch > 0) {
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
            if (elapsed.count() >= budget.seconds || batch >= kMaxWallClockBatches) {
                break;
            }
        }
        run_batch();
        ++batch;
        if (std::isfinite(c_best)) {
            result.incumbent_costs.push_back(c_best);
        }
    }

    result.stats.samples = static_cast<int>(samples.size());
    result.stats.batches = batch;
    if (incumbent.size() < 2) {
        return result;  // explicit failure: no feasible trajectory within budget
    }
    result.trajectory = Trajectory(std::move(incumbent));
    result.cost = c_best;
    return result;
}

EpisodeTrace run_episode(const World& world, const PlanQuery& query,
                         const RiskConstraint& constraint, const Kernel& kernel,
                         const GraphEpisodeOptions& options, Rng& rng) {
    constraint.validate();
    options.trigger.validate(constraint.metric.beta);
    if (!(options.step_length > 0.0)) {
        throw std::invalid_argument("run_episode: step_length must be positive");
    }

    const auto episode_start = std::chrono::steady_clock::now();
    EpisodeTrace trace;
    Rng obs_rng = rng.fork(0x0b5e7fe1);
    Rng plan_rng = rng.fork(0x91a2c3d4);

    GpModel model(kernel, world.sensor_noise_variance(), world.bounds());
    GraphPlanner planner(world, constraint, options.planner);

    const int max_steps = options.max_steps > 0
                              ? options.max_steps
                              : static_cast<int>(10.0 * world.bounds().diameter() /
                                                 options.step_length);

    Vec2 x = query.start;
    {
        const double z = world.observe(x, obs_rng);
        model.add_observation(x, z);
        trace.steps.push_back({0, {x.x, x.y}, z, -1, false, world.hazard(x), std::nullopt});
    }

    int step = 0;
    trace.status = EpisodeStatus::GoalReached;
    double planning_seconds = 0.0;

    while (!goal_contains(query.goal, x)) {
        if (step >= max_steps) {
            trace.status = EpisodeStatus::Timeout;
            break;
        }

        PlanQuery attempt{x, query.goal, query.budget};
        const auto t_plan = std::chrono::steady_clock::now();
        PlanResult plan = planner.plan(attempt, model, plan_rng);
        for (int retry = 0; !plan.trajectory && retry < options.budget_retries; ++retry) {
            attempt.budget.batches *= 2;
            attempt.budget.seconds *= 2.0;
            plan = planner.plan(attempt, model, plan_rng);
        }
        planning_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_plan).count();
        if (!plan.trajectory) {
            trace.status = EpisodeStatus::PlannerFailed;
            break;
        }

        const Trajectory committed = plan.trajectory->respaced(options.step_length);
        const int plan_id = static_cast<int>(trace.plans.size());
        trace.plans.push_back(committed);
        const GpModel model_at_plan = model;  // snapshot used to plan

        std::size_t wp = 0;
        bool triggered = false;
        while (!goal_contains(query.goal, x) && !triggered) {
            if (step >= max_steps) {
                trace.status = EpisodeStatus::Timeout;
                break;
            }
            if (wp + 1 >= committed.size()) {
                break;  // plan exhausted; replan from here
            }
            ++wp;
            x = committed.waypoints()[wp];
            const double z = world.observe(x, obs_rng);
            model.add_observation(x, z);
            ++step;

            const auto& wps = committed.waypoints();
            const std::span<const Vec2> ahead(wps.data() + wp + 1, wps.size() - wp - 1);
            triggered = check_trigger(ahead, model_at_plan, model, constraint, options.trigger);
            if (triggered) {
                ++trace.trigger_count;
            }
            trace.steps.push_back(
                {step, {x.x, x.y}, z, plan_id, triggered, world.hazard(x), std::nullopt});
        }
        if (trace.status != EpisodeStatus::GoalReached) {
            break;
        }
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
