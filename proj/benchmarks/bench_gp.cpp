#include <benchmark/benchmark.h>

#include "riskplan/gp.hpp"
#include "riskplan/normal.hpp"
#include "riskplan/risk.hpp"
#include "riskplan/rng.hpp"

using namespace riskplan;

namespace {

const Rect kBounds{{0.0, 0.0}, {20.0, 20.0}};

GpModel model_with(int n, std::uint64_t seed = 1) {
    Rng rng(seed);
    GpModel model(Kernel{}, 0.5, kBounds);
    for (int i = 0; i < n; ++i) {
        model.add_observation({rng.uniform(0.5, 19.5), rng.uniform(0.5, 19.5)},
                              rng.uniform(0.0, 100.0));
    }
    return model;
}

void BM_posterior(benchmark::State& state) {
    const GpModel model = model_with(static_cast<int>(state.range(0)));
    Rng rng(7);
    for (auto _ : state) {
        const Vec2 q{rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0)};
        benchmark::DoNotOptimize(model.posterior(q));
    }
}
BENCHMARK(BM_posterior)->Arg(10)->Arg(50)->Arg(100)->Arg(400);

void BM_posterior_derivative(benchmark::State& state) {
    const GpModel model = model_with(static_cast<int>(state.range(0)));
    Rng rng(7);
    for (auto _ : state) {
        const Vec2 q{rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0)};
        benchmark::DoNotOptimize(model.posterior_derivative(q));
    }
}
BENCHMARK(BM_posterior_derivative)->Arg(50)->Arg(200);

void BM_add_observation(benchmark::State& state) {
    const int base = static_cast<int>(state.range(0));
    Rng rng(11);
    for (auto _ : state) {
        state.PauseTiming();
        GpModel model = model_with(base);
        const Vec2 p{rng.uniform(0.5, 19.5), rng.uniform(0.5, 19.5)};
        state.ResumeTiming();
        model.add_observation(p, 42.0);
        benchmark::DoNotOptimize(model.size());
    }
}
BENCHMARK(BM_add_observation)->Arg(50)->Arg(200);

void BM_normal_quantile(benchmark::State& state) {
    double p = 0.0001;
    for (auto _ : state) {
        benchmark::DoNotOptimize(standard_normal_quantile(p));
        p += 0.0001;
        if (p >= 1.0) {
            p = 0.0001;
        }
    }
}
BENCHMARK(BM_normal_quantile);

void BM_cvar(benchmark::State& state) {
    Rng rng(3);
    for (auto _ : state) {
        const GaussianBelief b{rng.uniform(-10.0, 10.0), rng.uniform(0.1, 50.0)};
        benchmark::DoNotOptimize(cvar(b, 0.05, Tail::Upper));
    }
}
BENCHMARK(BM_cvar);

}  // namespace

BENCHMARK_MAIN();
