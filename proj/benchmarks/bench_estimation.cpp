#include "ietmfc/ietmfc.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace ietmfc;

struct Setup {
  Scenario sc = reference_scenario();
  FlowSet fs = solve_flowset(sc.params, sc.grid);
  KernelSet ks = build_kernels(fs, 0);
  MFPrediction pred = predict_mf(fs, sc.init.z0 + sc.errors.mean_error, 0);
  ControlLaw law = solve_offset(fs, pred);
  std::vector<Eigen::VectorXd> samples;

  Setup() {
    for (int l = 0; l <= sc.grid.n_obs; ++l)
      samples.push_back(Eigen::VectorXd::Constant(1, 0.01 * l));
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

void BM_ConsecutiveWindows(benchmark::State& state) {
  const Setup& s = setup();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        consecutive_windows(s.fs, s.ks, s.law, s.pred, s.samples, 0, s.sc.grid.substeps()));
}
BENCHMARK(BM_ConsecutiveWindows)->Unit(benchmark::kMicrosecond);

void BM_MleSolve(benchmark::State& state) {
  const Setup& s = setup();
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto windows =
      consecutive_windows(s.fs, s.ks, s.law, s.pred, s.samples, 0, s.sc.grid.substeps());
  const std::span<const TransitionMoments> tms = std::span(windows).first(k);
  const std::span<const Eigen::VectorXd> obs(s.samples.data() + 1, k);
  for (auto _ : state) benchmark::DoNotOptimize(mle_solve(tms, obs, s.sc.errors.bound));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(k));
}
BENCHMARK(BM_MleSolve)->Arg(10)->Arg(100);

}  // namespace
