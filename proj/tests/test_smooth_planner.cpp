#include <doctest.h>

#include <cmath>

#include "riskplan/rng.hpp"
#include "riskplan/smooth_planner.hpp"
#include "riskplan/trace.hpp"

using namespace riskplan;

namespace {

WorldConfig empty_world_config() {
    WorldConfig cfg;
    cfg.bounds = Rect{{0.0, 0.0}, {20.0, 20.0}};
    cfg.sensor_noise_variance = 0.5;
    return cfg;
}

const RiskMetric kCvar{MetricKind::ConditionalValueAtRisk, 0.2, Tail::Upper};
const RiskConstraint kConstraint{kCvar, 10.0, 0.1};

FactorGraphProblem line_problem(Vec2 start, Vec2 goal, int m, int dof = 2) {
    return FactorGraphProblem::from_trajectory(
        *initial_trajectory(start, goal, World(empty_world_config()), m), dof);
}

double total_factor_cost(const FactorGraphProblem& p, const World& world,
                         const GpModel& model, const RiskConstraint& c,
                         const FactorWeights& w) {
    double cost = 0.0;
    for (int i = 1; i + 1 < p.num_states(); ++i) {
        const Vec2 second_diff =
            p.position(i - 1) - 2.0 * p.position(i) + p.position(i + 1);
        cost += 0.5 * w.smoothness * second_diff.squared_norm();
        if (p.dof() == 3) {
            const double h = p.heading(i - 1) - 2.0 * p.heading(i) + p.heading(i + 1);
            cost += 0.5 * w.smoothness * h * h;
        }
    }
    for (int i = 0; i < p.num_states(); ++i) {
        const double ho = obstacle_residual(world, p.position(i), w.epsilon_obs) / w.sigma_obs;
        const double hr = risk_residual(c, model, p.position(i)) / w.sigma_risk;
        cost += 0.5 * (ho * ho + hr * hr);
    }
    return cost;
}

}  // namespace

TEST_CASE("obstacle residual hinges on the safety margin") {
    WorldConfig cfg = empty_world_config();
    cfg.obstacles = {Rect{{9.0, 9.0}, {11.0, 11.0}}};
    const World world(cfg);
    CHECK(obstacle_residual(world, {3.0, 3.0}, 0.5) == 0.0);  // far away
    // on the boundary the signed distance vanishes
    CHECK(obstacle_residual(world, {9.0, 10.0}, 0.5) ==
          doctest::Approx(0.5).epsilon(cfg.sdf_resolution));
    // inside at depth ~0.6
    CHECK(obstacle_residual(world, {10.4, 10.0}, 0.5) ==
          doctest::Approx(0.5 + 0.6).epsilon(2.0 * cfg.sdf_resolution));
}

TEST_CASE("risk residual is zero when satisfied and exponential when violated") {
    const World world(empty_world_config());
    GpModel model(Kernel{}, 0.5, world.bounds());
    model.add_observation({10.0, 10.0}, 50.0);

    const Vec2 x{10.0, 10.0};
    const double risk = apply(kCvar, model.posterior(x));
    const RiskConstraint satisfied{kCvar, risk + 1.0, 0.1};
    CHECK(risk_residual(satisfied, model, x) == 0.0);

    const RiskConstraint violated{kCvar, risk - 5.0, 0.1};
    CHECK(risk_residual(violated, model, x) ==
          doctest::Approx(std::exp(0.5) - 1.0).epsilon(1e-9));

    // continuous across the boundary
    const RiskConstraint barely{kCvar, risk - 1e-9, 0.1};
    CHECK(risk_residual(barely, model, x) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(risk_residual(barely, model, x) >= 0.0);
}

TEST_CASE("optimizer recovers the straight line with nothing to avoid") {
    const World world(empty_world_config());
    GpModel empty(Kernel{}, 0.5, world.bounds());
    const Vec2 start{2.0, 3.0};
    const Vec2 goal{17.0, 12.0};

    FactorGraphProblem problem = line_problem(start, goal, 20);
    // perturb the interior
    Rng rng(4);
    for (int i = 1; i + 1 < problem.num_states(); ++i) {
        Vec2 p = problem.position(i);
        p.x += rng.uniform(-0.5, 0.5);
        p.y += rng.uniform(-0.5, 0.5);
        problem.set_position(i, p);
    }
    const RiskConstraint relaxed{kCvar, 100.0, 0.1};
    const OptimizeResult res = optimize(problem, world, empty, relaxed, {});
    CHECK_FALSE(res.diverged);
    for (int i = 0; i < problem.num_states(); ++i) {
        const double t = static_cast<double>(i) / (problem.num_states() - 1);
        const Vec2 expect = lerp(start, goal, t);
        CHECK(distance(problem.position(i), expect) < 1e-6);
    }
}

TEST_CASE("accepted LM steps never increase the total factor cost") {
    WorldConfig cfg = empty_world_config();
    cfg.obstacles = {Circle{{10.0, 7.6}, 2.0}};
    const World world(cfg);
    GpModel model(Kernel{}, 0.5, world.bounds());
    Rng rng(6);
    for (int i = 0; i < 10; ++i) {
        model.add_observation({12.0 + rng.uniform(-1.0, 1.0), 9.0 + rng.uniform(-1.0, 1.0)},
                              60.0);
    }
    FactorGraphProblem problem = line_problem({2.0, 8.0}, {18.0, 8.0}, 30);
    const OptimizeResult res = optimize(problem, world, model, kConstraint, {});
    REQUIRE(res.accepted_costs.size() >= 2);
    for (std::size_t i = 1; i < res.accepted_costs.size(); ++i) {
        CHECK(res.accepted_costs[i] <= res.accepted_costs[i - 1]);
    }
    CHECK(res.final_cost == doctest::Approx(res.accepted_costs.back()));
}

TEST_CASE("optimizer clears a mid-line obstacle and beats a grid-search oracle") {
    WorldConfig cfg = empty_world_config();
    cfg.obstacles = {Circle{{10.0, 8.0}, 1.5}};
    const World world(cfg);
    GpModel empty(Kernel{}, 0.5, world.bounds());
    const RiskConstraint relaxed{kCvar, 100.0, 0.1};
    // with only 3 interior states the obstacle factor needs enough weight
    // that the optimum clears rather than cuts the circle
    FactorWeights weights;
    weights.smoothness = 2.0;
    weights.sigma_obs = 0.3;

    // tiny problem: 2 anchors + 3 interior states, seeded around the obstacle
    FactorGraphProblem problem = FactorGraphProblem::from_trajectory(
        *initial_trajectory({4.0, 8.0}, {16.0, 8.0}, world, 5), 2);
    const double initial_cost = total_factor_cost(problem, world, empty, relaxed, weights);
    const OptimizeResult res = optimize(problem, world, empty, relaxed, weights);

    for (int i = 0; i < problem.num_states(); ++i) {
        CHECK(world.signed_distance(problem.position(i)) >= 0.0);
    }
    CHECK(res.final_cost < initial_cost);

    // coarse grid search over the 3 interior states, y displaced off the line
    double best_grid = std::numeric_limits<double>::infinity();
    FactorGraphProblem grid_problem = line_problem({4.0, 8.0}, {16.0, 8.0}, 5);
    for (double y1 = 4.0; y1 <= 12.0; y1 += 0.5) {
        for (double y2 = 4.0; y2 <= 12.0; y2 += 0.5) {
            for (double y3 = 4.0; y3 <= 12.0; y3 += 0.5) {
                grid_problem.set_position(1, {7.0, y1});
                grid_problem.set_position(2, {10.0, y2});
                grid_problem.set_position(3, {13.0, y3});
                best_grid = std::min(best_grid, total_factor_cost(grid_problem, world, empty,
                                                                  relaxed, weights));
            }
        }
    }
    CHECK(res.final_cost <= best_grid + 1e-6);
}

TEST_CASE("optimizer reduces the worst posterior risk along the line") {
    const World world(empty_world_config());
    GpModel model(Kernel{}, 0.5, world.bounds());
    Rng rng(8);
    for (int i = 0; i < 15; ++i) {
        model.add_observation({10.0 + rng.uniform(-1.0, 1.0), 8.0 + rng.uniform(-1.0, 1.0)},
                              40.0 + rng.normal(0.0, 0.7));
    }
    FactorGraphProblem problem = line_problem({2.0, 8.0}, {18.0, 8.0}, 30);
    const auto max_cvar = [&](const FactorGraphProblem& p) {
        double worst = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < p.num_states(); ++i) {
            worst = std::max(worst, apply(kCvar, model.posterior(p.position(i))));
        }
        return worst;
    };
    const double before = max_cvar(problem);
    optimize(problem, world, model, kConstraint, {});
    CHECK(max_cvar(problem) <= before);
}

TEST_CASE("initial trajectory handles free, blocked, and degenerate cases") {
    const World free_world(empty_world_config());
    const auto straight = initial_trajectory({2.0, 2.0}, {18.0, 18.0}, free_world, 10);
    REQUIRE(straight.has_value());
    CHECK(straight->size() == 10);
    CHECK(straight->length() ==
          doctest::Approx(distance({2.0, 2.0}, {18.0, 18.0})).epsilon(1e-9));

    // wall with a gap
    WorldConfig cfg = empty_world_config();
    cfg.obstacles = {Rect{{9.0, 0.0}, {11.0, 9.0}}, Rect{{9.0, 11.0}, {11.0, 20.0}}};
    const World wall_world(cfg);
    const auto through = initial_trajectory({2.0, 10.0}, {18.0, 10.0}, wall_world, 40);
    REQUIRE(through.has_value());
    const auto& wps = through->waypoints();
    for (std::size_t i = 1; i < wps.size(); ++i) {
        CHECK(wall_world.collision_free(wps[i - 1], wps[i]));
    }
    // must have used the gap near y = 10
    bool used_gap = false;
    for (const Vec2& w : wps) {
        if (std::abs(w.x - 10.0) < 0.6) {
            used_gap = used_gap || (w.y > 9.0 && w.y < 11.0);
        }
    }
    CHECK(used_gap);

    const auto degenerate = initial_trajectory({5.0, 5.0}, {5.0, 5.0}, free_world, 10);
    REQUIRE(degenerate.has_value());
    CHECK(degenerate->length() == 0.0);
    CHECK(degenerate->size() == 2);

    // fully separated halves: no path
    WorldConfig blocked = empty_world_config();
    blocked.obstacles = {Rect{{9.0, -1.0}, {11.0, 21.0}}};
    const World blocked_world(blocked);
    CHECK_FALSE(initial_trajectory({2.0, 10.0}, {18.0, 10.0}, blocked_world, 10).has_value());
}

TEST_CASE("frozen states are never moved") {
    const World world(empty_world_config());
    GpModel empty(Kernel{}, 0.5, world.bounds());
    const RiskConstraint relaxed{kCvar, 100.0, 0.1};

    SUBCASE("freezing everything is a no-op") {
        FactorGraphProblem problem = line_problem({2.0, 2.0}, {18.0, 6.0}, 12);
        for (int i = 0; i < problem.num_states(); ++i) {
            problem.fix_factors(i);
        }
        const auto before = problem.raw_values();
        const OptimizeResult res = optimize(problem, world, empty, relaxed, {});
        CHECK(problem.raw_values() == before);
        CHECK(res.iterations == 0);
    }

    SUBCASE("freezing the first k keeps them bit-identical") {
        FactorGraphProblem problem = line_problem({2.0, 2.0}, {18.0, 6.0}, 12);
        Rng rng(5);
        for (int i = 1; i + 1 < problem.num_states(); ++i) {
            Vec2 p = problem.position(i);
            p.y += rng.uniform(-1.0, 1.0);
            problem.set_position(i, p);
        }
        const int k = 4;
        for (int i = 0; i < k; ++i) {
            problem.fix_factors(i);
        }
        std::vector<Vec2> before;
        for (int i = 0; i < k; ++i) {
            before.push_back(problem.position(i));
        }
        optimize(problem, world, empty, relaxed, {});
        for (int i = 0; i < k; ++i) {
            CHECK(problem.position(i).x == before[static_cast<std::size_t>(i)].x);
            CHECK(problem.position(i).y == before[static_cast<std::size_t>(i)].y);
        }
    }

    SUBCASE("freezing none matches plain optimization") {
        FactorGraphProblem a = line_problem({2.0, 2.0}, {18.0, 6.0}, 12);
        FactorGraphProblem b = a;
        optimize(a, world, empty, relaxed, {});
        optimize(b, world, empty, relaxed, {});
        CHECK(a.raw_values() == b.raw_values());
    }
}

TEST_CASE("anchors stay pinned through optimization") {
    WorldConfig cfg = empty_world_config();
    cfg.obstacles = {Circle{{10.0, 8.0}, 1.0}};
    const World world(cfg);
    GpModel empty(Kernel{}, 0.5, world.bounds());
    FactorGraphProblem problem = line_problem({3.0, 8.0}, {17.0, 8.0}, 25);
    optimize(problem, world, empty, kConstraint, {});
    CHECK(distance(problem.position(0), {3.0, 8.0}) < 1e-9);
    CHECK(distance(problem.position(24), {17.0, 8.0}) < 1e-9);
}

TEST_CASE("risk and obstacle Jacobians match finite differences away from kinks") {
    WorldConfig cfg = empty_world_config();
    cfg.obstacles = {Circle{{10.0, 10.0}, 2.0}};
    const World world(cfg);
    GpModel model(Kernel{}, 0.5, world.bounds());
    Rng rng(13);
    for (int i = 0; i < 20; ++i) {
        model.add_observation({rng.uniform(4.0, 16.0), rng.uniform(4.0, 16.0)},
                              rng.uniform(10.0, 70.0));
    }
    const RiskConstraint expected{{MetricKind::ExpectedValue, 0.2, Tail::Upper}, 15.0, 0.1};
    const double h = 1e-6;
    int risk_checked = 0;
    int obs_checked = 0;
    for (int i = 0; i < 400 && (risk_checked < 20 || obs_checked < 20); ++i) {
        const Vec2 x{rng.uniform(1.0, 19.0), rng.uniform(1.0, 19.0)};

        const double rr = risk_residual(expected, model, x);
        if (rr > 1e-3 && risk_checked < 20) {  // clearly violated, away from the kink
            const Vec2 analytic = cost_gradient(expected, model, x);
            const double fx = (risk_residual(expected, model, {x.x + h, x.y}) -
                               risk_residual(expected, model, {x.x - h, x.y})) /
                              (2 * h);
            const double fy = (risk_residual(expected, model, {x.x, x.y + h}) -
                               risk_residual(expected, model, {x.x, x.y - h})) /
                              (2 * h);
            const double scale = std::max({std::abs(fx), std::abs(fy), 1e-3});
            CHECK(std::abs(analytic.x - fx) / scale < 1e-3);
            CHECK(std::abs(analytic.y - fy) / scale < 1e-3);
            ++risk_checked;
        }

        // obstacle hinge states sampled from the active annulus directly
        const double ring = rng.uniform(2.05, 2.45);
        const double angle = rng.uniform(0.0, 6.28318);
        const Vec2 xo{10.0 + ring * std::cos(angle), 10.0 + ring * std::sin(angle)};
        const double ro = obstacle_residual(world, xo, 0.5);
        if (ro > 0.05 && ro < 0.45 && world.signed_distance(xo) > 0.05 && obs_checked < 20) {
            const Vec2 grad = world.signed_distance_gradient(xo);
            const double fx = (obstacle_residual(world, {xo.x + h, xo.y}, 0.5) -
                               obstacle_residual(world, {xo.x - h, xo.y}, 0.5)) /
                              (2 * h);
            const double fy = (obstacle_residual(world, {xo.x, xo.y + h}, 0.5) -
                               obstacle_residual(world, {xo.x, xo.y - h}, 0.5)) /
                              (2 * h);
            const double scale = std::max({std::abs(fx), std::abs(fy), 1e-3});
            CHECK(std::abs(-grad.x - fx) / scale < 1e-3);
            CHECK(std::abs(-grad.y - fy) / scale < 1e-3);
            ++obs_checked;
        }
    }
    CHECK(risk_checked >= 10);
    CHECK(obs_checked >= 10);
}

TEST_CASE("warm-started re-solves converge much faster than cold solves") {
    WorldConfig cfg = empty_world_config();
    cfg.obstacles = {Circle{{10.0, 9.0}, 1.5}};
    const World world(cfg);
    GpModel model(Kernel{}, 0.5, world.bounds());
    Rng rng(21);
    for (int i = 0; i < 10; ++i) {
        model.add_observation({8.0 + rng.uniform(-1.0, 1.0), 12.0 + rng.uniform(-1.0, 1.0)},
                              30.0);
    }

    FactorGraphProblem problem = line_problem({2.0, 10.0}, {18.0, 10.0}, 30);
    const OptimizeResult cold = optimize(problem, world, model, kConstraint, {});
    // warm re-solve of the identical problem: no new information
    const OptimizeResult warm = optimize(problem, world, model, kConstraint, {});
    CHECK(cold.iterations >= 4);
    CHECK(warm.iterations * 4 <= cold.iterations);
}

TEST_CASE("incremental episode over a silent field walks nearly straight") {
    WorldConfig cfg = empty_world_config();
    cfg.sensor_noise_variance = 0.0;
    const World world(cfg);
    IgpEpisodeOptions options;
    options.num_states = 30;
    Rng rng(31);
    const EpisodeTrace trace = run_episode_igp(world, {2.0, 2.0}, {18.0, 18.0},
                                               kConstraint, Kernel{}, options, rng);
    REQUIRE(trace.status == EpisodeStatus::GoalReached);
    const double straight = distance({2.0, 2.0}, {18.0, 18.0});
    CHECK(trace.path_length() <= 1.05 * straight);
    // per-step optimizer records are present
    REQUIRE(trace.steps.size() > 2);
    CHECK(trace.steps[1].opt.has_value());
}

TEST_CASE("3-dof episodes carry headings through the trace") {
    const World world(empty_world_config());
    IgpEpisodeOptions options;
    options.num_states = 20;
    options.dof = 3;
    Rng rng(33);
    const EpisodeTrace trace = run_episode_igp(world, {2.0, 10.0}, {18.0, 10.0},
                                               kConstraint, Kernel{}, options, rng);
    REQUIRE(trace.status == EpisodeStatus::GoalReached);
    for (const StepRecord& s : trace.steps) {
        REQUIRE(s.state.size() == 3);
    }
    // along a straight east-bound run the heading stays near zero
    CHECK(std::abs(trace.steps.back().state[2]) < 0.5);
}

TEST_CASE("incremental episodes replay deterministically") {
    WorldConfig cfg = empty_world_config();
    cfg.sources = {HazardSource{{10.0, 11.0}, 60.0, 0.5, {1.1, 0.9}}};
    const World world(cfg);
    IgpEpisodeOptions options;
    options.num_states = 25;
    Rng a(5);
    Rng b(5);
    const EpisodeTrace ta = run_episode_igp(world, {2.0, 10.0}, {18.0, 10.0},
                                            kConstraint, Kernel{}, options, a);
    const EpisodeTrace tb = run_episode_igp(world, {2.0, 10.0}, {18.0, 10.0},
                                            kConstraint, Kernel{}, options, b);
    CHECK(trace_to_jsonl(ta) == trace_to_jsonl(tb));
    CHECK(dataset_to_csv(ta) == dataset_to_csv(tb));
}

TEST_CASE("factor weights are validated") {
    FactorWeights bad;
    bad.sigma_risk = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    FactorWeights bad2;
    bad2.epsilon_obs = -1.0;
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
}
