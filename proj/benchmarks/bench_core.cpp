#include <benchmark/benchmark.h>

#include "mgstab/eigen_analysis.hpp"
#include "mgstab/equilibrium.hpp"
#include "mgstab/microgrid.hpp"
#include "mgstab/simulator.hpp"
#include "mgstab/small_signal.hpp"

using namespace mgstab;

namespace {

SimplifiedModel fixture_model() { return build_simplified_model(table1_fixture()); }

void BM_SolveEquilibrium(benchmark::State& state) {
    const SimplifiedModel model = fixture_model();
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_equilibrium(model));
    }
}

void BM_SolveEquilibriumWarmStart(benchmark::State& state) {
    const SimplifiedModel model = fixture_model();
    EquilibriumOptions opts;
    opts.initial_guess = solve_equilibrium(model);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_equilibrium(model, opts));
    }
}

void BM_BuildSmallSignalModel(benchmark::State& state) {
    const SimplifiedModel model = fixture_model();
    const EquilibriumPoint eq = solve_equilibrium(model);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_small_signal_model(model, eq));
    }
}

void BM_EigenDecompose(benchmark::State& state) {
    const SimplifiedModel model = fixture_model();
    const EquilibriumPoint eq = solve_equilibrium(model);
    const SmallSignalModel ss = build_small_signal_model(model, eq);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eigen_decompose(ss.a_sys));
    }
}

void BM_SimulatorRhs(benchmark::State& state) {
    const SimplifiedModel model = fixture_model();
    EquilibriumOptions opts;
    opts.droop_power = DroopPower::bus_side;
    const EquilibriumPoint eq = solve_equilibrium(model, opts);
    const SimState x = equilibrium_state(model, eq);
    SimState dx;
    for (auto _ : state) {
        rhs(model, x, dx);
        benchmark::DoNotOptimize(dx);
    }
}

void BM_Integrate100ms(benchmark::State& state) {
    const SimplifiedModel model = fixture_model();
    EquilibriumOptions opts;
    opts.droop_power = DroopPower::bus_side;
    const EquilibriumPoint eq = solve_equilibrium(model, opts);
    SimState x0 = equilibrium_state(model, eq);
    for (std::size_t i = 0; i < model.n_dgs(); ++i) x0.i[i] *= 1.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate(model, x0, 0.1, SimOptions{}));
    }
}

void BM_FdJacobian(benchmark::State& state) {
    const SimplifiedModel model = fixture_model();
    EquilibriumOptions opts;
    opts.droop_power = DroopPower::bus_side;
    const EquilibriumPoint eq = solve_equilibrium(model, opts);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fd_jacobian(model, eq));
    }
}

}  // namespace

BENCHMARK(BM_SolveEquilibrium)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SolveEquilibriumWarmStart)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BuildSmallSignalModel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EigenDecompose)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SimulatorRhs)->Unit(benchmark::kNanosecond);
BENCHMARK(BM_Integrate100ms)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FdJacobian)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
