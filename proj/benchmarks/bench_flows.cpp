#include "ietmfc/ietmfc.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace ietmfc;

Scenario with_step(double h) {
  Scenario sc = reference_scenario();
  sc.grid.h = h;
  return sc;
}

void BM_SolveFlowset(benchmark::State& state) {
  const Scenario sc = with_step(1.0 / static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_flowset(sc.params, sc.grid));
  state.SetItemsProcessed(state.iterations() * sc.grid.last_node());
}
BENCHMARK(BM_SolveFlowset)->Arg(500)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_PredictAndOffset(benchmark::State& state) {
  const Scenario sc = reference_scenario();
  const FlowSet fs = solve_flowset(sc.params, sc.grid);
  for (auto _ : state) {
    const MFPrediction pred = predict_mf(fs, sc.init.z0, 0);
    benchmark::DoNotOptimize(solve_offset(fs, pred));
  }
}
BENCHMARK(BM_PredictAndOffset)->Unit(benchmark::kMicrosecond);

void BM_BuildKernels(benchmark::State& state) {
  const Scenario sc = reference_scenario();
  const FlowSet fs = solve_flowset(sc.params, sc.grid);
  const long anchor = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(build_kernels(fs, anchor));
}
BENCHMARK(BM_BuildKernels)->Arg(0)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace
