#include <benchmark/benchmark.h>

#include <numeric>

#include "csflow/braid.hpp"
#include "csflow/control.hpp"
#include "csflow/euler_channel.hpp"
#include "csflow/generalized_flow.hpp"
#include "csflow/planner.hpp"

using namespace csflow;

static void BM_SolverStep(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Grid g{n, n, 2.0};
    FlowState s = from_profile(StepProfile::uniform({1.0, -1.0}), 0.25, g);
    s.omega_hat[g.half() + 1] = {0.01, 0.0};
    ChannelSolver solver(g);
    const double dt = 0.2 / static_cast<double>(n);
    for (auto _ : state) {
        solver.step(s, dt);
        benchmark::DoNotOptimize(s.omega_hat.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(g.points()));
}
BENCHMARK(BM_SolverStep)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

static void BM_Plan(benchmark::State& state) {
    const auto K = static_cast<std::size_t>(state.range(0));
    const StepProfile src = random_profile(K, 42);
    const ReachableInstance inst = random_reachable_target(src, 12, 43);
    for (auto _ : state) benchmark::DoNotOptimize(plan(src, inst.target).achieved_error);
}
BENCHMARK(BM_Plan)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_MinimizeAction(benchmark::State& state) {
    DiscreteFlowProblem p;
    p.grid = {3, 2, 1.0};
    p.endpoint = {5, 3, 4, 1, 2, 0};
    p.interior_slices = static_cast<std::size_t>(state.range(0));
    const SearchMode mode = state.range(1) ? SearchMode::heuristic : SearchMode::exact;
    for (auto _ : state) benchmark::DoNotOptimize(minimize_action(p, {.mode = mode}).action);
}
BENCHMARK(BM_MinimizeAction)->Args({1, 0})->Args({2, 0})->Args({1, 1})->Args({2, 1})->Unit(benchmark::kMillisecond);

static void BM_BraidWord(benchmark::State& state) {
    const CellGrid g{8, 8, 1.0};
    std::vector<double> v(8);
    std::iota(v.begin(), v.end(), -4.0);
    for (auto& x : v) x *= 0.05;
    const TrajectoryEnsemble e = parallel_flow_ensemble(g, v, 1.0, 32);
    for (auto _ : state) benchmark::DoNotOptimize(braid_word(e).word.size());
}
BENCHMARK(BM_BraidWord)->Unit(benchmark::kMillisecond);

static void BM_TranspositionSchedule(benchmark::State& state) {
    const StepProfile p = StepProfile::uniform({1.0, -1.0});
    for (auto _ : state) benchmark::DoNotOptimize(transposition_control(p, 1, 20.0, 0.5).cost());
}
BENCHMARK(BM_TranspositionSchedule)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
