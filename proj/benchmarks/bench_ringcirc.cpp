#include <benchmark/benchmark.h>

#include "ringcirc/scattering.hpp"

using namespace ringcirc;

namespace {

const PhysicalSpec& qps() { static const PhysicalSpec s = preset("tableS1-qps"); return s; }

BiasPoint operating_bias()
{
    BiasPoint b;
    b.x = 0.37;
    return b;
}

constexpr double kOmega = 11.84;

} // namespace

static void BM_BuildHamiltonian(benchmark::State& state)
{
    const RingSpec ring = dual_map(qps());
    BiasPoint b = operating_bias();
    b.n0 = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_hamiltonian(ring, b, static_cast<int>(state.range(0))));
    }
}
BENCHMARK(BM_BuildHamiltonian)->Arg(4)->Arg(6)->Arg(8);

static void BM_SolveRing(benchmark::State& state)
{
    const RingSpec ring = dual_map(qps());
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_ring(ring, operating_bias(), {static_cast<int>(state.range(0)), 5}));
    }
}
BENCHMARK(BM_SolveRing)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_RotatingFrameSteadyState(benchmark::State& state)
{
    const int levels = static_cast<int>(state.range(0));
    const RingEigensystem sys = solve_ring(dual_map(qps()), operating_bias(), {4, levels});
    DriveSpec d;
    d.omega = kOmega;
    d.g = coupling_strength(qps(), kOmega);
    d.alpha[0] = 1e-4;
    const CollapseOperators ops = collapse_ops(sys, d);
    for (auto _ : state) {
        benchmark::DoNotOptimize(steady_state_rotating_frame(sys.energies, ops));
    }
}
BENCHMARK(BM_RotatingFrameSteadyState)->DenseRange(3, 8)->Unit(benchmark::kMicrosecond);

static void BM_SMatrix(benchmark::State& state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(s_matrix(qps(), operating_bias(), kOmega));
    }
}
BENCHMARK(BM_SMatrix)->Unit(benchmark::kMillisecond);

static void BM_SMatrixTimeDomain(benchmark::State& state)
{
    SolverOptions o;
    o.force_time_domain = true;
    for (auto _ : state) {
        benchmark::DoNotOptimize(s_matrix(qps(), operating_bias(), kOmega, {}, o));
    }
}
BENCHMARK(BM_SMatrixTimeDomain)->Unit(benchmark::kMillisecond)->Iterations(2);

static void BM_FrequencySweep(benchmark::State& state)
{
    const auto omegas = linspace(11.0, 12.5, static_cast<std::size_t>(state.range(0)));
    SolverOptions o;
    o.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(frequency_sweep(qps(), operating_bias(), omegas, {}, o));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FrequencySweep)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
