#include <benchmark/benchmark.h>

#include <memory>

#include "gzk/evolution.hpp"
#include "gzk/groundstate.hpp"
#include "gzk/linearized.hpp"
#include "gzk/modulation.hpp"
#include "gzk/spectral.hpp"

using namespace gzk;

namespace {

std::shared_ptr<const GroundState> ground(int n) {
  return std::make_shared<const GroundState>(solve_ground_state(4, SpectralGrid(n, 32.0)));
}

void BM_ForwardInverse(benchmark::State& state) {
  const SpectralGrid g(static_cast<int>(state.range(0)), 32.0);
  const RealField2D f = random_smooth_field(g, 1, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(transform_inverse(transform_forward(f)));
}
BENCHMARK(BM_ForwardInverse)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);

void BM_DealiasedPower(benchmark::State& state) {
  const SpectralGrid g(static_cast<int>(state.range(0)), 32.0);
  const RealField2D f = random_smooth_field(g, 2, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(dealiased_power(f, 4));
}
BENCHMARK(BM_DealiasedPower)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_GroundState(benchmark::State& state) {
  const SpectralGrid g(static_cast<int>(state.range(0)), 32.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_ground_state(4, g));
}
BENCHMARK(BM_GroundState)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ApplyL(benchmark::State& state) {
  const LinearizedOperator op(ground(static_cast<int>(state.range(0))));
  const RealField2D f = random_smooth_field(op.grid(), 3, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(f));
}
BENCHMARK(BM_ApplyL)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Step(benchmark::State& state) {
  const auto q = ground(256);
  SolverConfig c;
  c.integrator = state.range(0) == 0 ? Integrator::kETDRK4 : Integrator::kIFRK4;
  const Stepper stepper(q->grid(), c);
  auto spec = transform_forward(unstable_initial_data(*q, 10));
  for (auto _ : state) {
    stepper.advance(spec);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_Step)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State& state) {
  const ModulationBasis b = ModulationBasis::build(ground(256));
  RealField2D u = shift(b.ground->profile, -0.3, 0.2);
  u.axpy(0.05, random_smooth_field(b.grid(), 4, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(decompose(u, b, 0.3, -0.2));
}
BENCHMARK(BM_Decompose)->Unit(benchmark::kMillisecond);

void BM_TubeDistance(benchmark::State& state) {
  const auto q = ground(256);
  RealField2D u = shift(q->profile, -1.1, 0.4);
  u.axpy(0.05, random_smooth_field(q->grid(), 5, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(tube_distance(u, *q));
}
BENCHMARK(BM_TubeDistance)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
