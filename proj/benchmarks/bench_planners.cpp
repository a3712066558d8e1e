#include <benchmark/benchmark.h>

#include "riskplan/graph_planner.hpp"
#include "riskplan/rng.hpp"
#include "riskplan/smooth_planner.hpp"

using namespace riskplan;

namespace {

WorldConfig bench_world_config() {
    WorldConfig cfg;
    cfg.bounds = Rect{{0.0, 0.0}, {20.0, 20.0}};
    cfg.sensor_noise_variance = 0.5;
    cfg.sources = {HazardSource{{8.0, 9.0}, 100.0, 0.25, {1.1, 0.9}}};
    return cfg;
}

const RiskConstraint kConstraint{
    {MetricKind::ConditionalValueAtRisk, 0.05, Tail::Upper}, 30.0, 0.1};

GpModel observed_model(const World& world, int n, std::uint64_t seed) {
    Rng rng(seed);
    GpModel model(Kernel{}, world.sensor_noise_variance(), world.bounds());
    for (int i = 0; i < n; ++i) {
        const Vec2 p{rng.uniform(0.5, 19.5), rng.uniform(0.5, 19.5)};
        model.add_observation(p, world.hazard(p) + rng.normal(0.0, 0.7));
    }
    return model;
}

void BM_edge_cost(benchmark::State& state) {
    const World world(bench_world_config());
    const GpModel model = observed_model(world, static_cast<int>(state.range(0)), 5);
    Rng rng(9);
    for (auto _ : state) {
        const Vec2 a{rng.uniform(1.0, 19.0), rng.uniform(1.0, 19.0)};
        const Vec2 b{rng.uniform(1.0, 19.0), rng.uniform(1.0, 19.0)};
        benchmark::DoNotOptimize(edge_cost(kConstraint, model, a, b, 0.1));
    }
}
BENCHMARK(BM_edge_cost)->Arg(50)->Arg(150);

void BM_plan_batches(benchmark::State& state) {
    const World world(bench_world_config());
    const GpModel model = observed_model(world, 60, 5);
    GraphPlanner planner(world, kConstraint, {});
    PlanBudget budget;
    budget.mode = PlanBudget::Mode::Batches;
    budget.batches = static_cast<int>(state.range(0));
    const PlanQuery query{{2.0, 2.0}, Circle{{18.0, 18.0}, 1.0}, budget};
    Rng rng(13);
    for (auto _ : state) {
        benchmark::DoNotOptimize(planner.plan(query, model, rng));
    }
}
BENCHMARK(BM_plan_batches)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_optimize_warm_vs_cold(benchmark::State& state) {
    const World world(bench_world_config());
    const GpModel model = observed_model(world, 60, 5);
    const auto seed_traj = initial_trajectory({2.0, 10.0}, {18.0, 10.0}, world, 50);
    FactorGraphProblem warm = FactorGraphProblem::from_trajectory(*seed_traj, 2);
    optimize(warm, world, model, kConstraint, {});
    const bool cold = state.range(0) == 0;
    for (auto _ : state) {
        FactorGraphProblem problem =
            cold ? FactorGraphProblem::from_trajectory(*seed_traj, 2) : warm;
        benchmark::DoNotOptimize(optimize(problem, world, model, kConstraint, {}));
    }
}
BENCHMARK(BM_optimize_warm_vs_cold)
    ->Arg(0)
    ->Arg(1)
    ->Unit(benchmark::kMillisecond);

}  // namespace
