#include "ietmfc/ietmfc.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace ietmfc;

void BM_Simulate(benchmark::State& state) {
  Scenario sc = reference_scenario();
  const auto regime = static_cast<Regime>(state.range(0));
  if (regime == Regime::iet_dmfc) sc.grid.mod_points = {5, 50};
  const FlowSet fs = solve_flowset(sc.params, sc.grid);
  SimulationOptions opt;
  opt.record_predictions = false;
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(sc, regime, fs, seed++, opt));
  state.SetLabel(std::string(to_string(regime)));
}
BENCHMARK(BM_Simulate)
    ->Arg(static_cast<int>(Regime::complete))
    ->Arg(static_cast<int>(Regime::erroneous))
    ->Arg(static_cast<int>(Regime::iet_dmfc))
    ->Unit(benchmark::kMillisecond);

}  // namespace
