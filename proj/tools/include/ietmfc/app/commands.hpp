#pragma once

#include "ietmfc/app/config.hpp"
#include "ietmfc/odeflow.hpp"
#include "ietmfc/population.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ietmfc::app {

/// Process exit codes.
enum ExitCode : int { ok = 0, config_error = 1, numerical_error = 2 };

/// Worker cap from IETMFC_THREADS, else the hardware concurrency (at least 1).
int worker_threads();

/// "5,50" -> {5, 50}; an empty string gives an empty list.
/// Throws ConfigError on anything that is not a comma separated integer list.
std::vector<int> parse_int_list(std::string_view text);

struct SimulateRequest {
  std::filesystem::path config;  // empty: reference scenario
  std::optional<Regime> regime;
  std::optional<std::uint64_t> seed;
  int seeds = 1;  // > 1 writes seed_<s>/ subdirectories
  std::filesystem::path out;
  std::optional<std::vector<int>> mod_points;
  std::optional<bool> recenter;
  std::optional<std::vector<int>> k_list;  // default 1..first modification
};

struct EstimateRequest {
  std::filesystem::path config;  // empty: the config stored in the trace manifest
  std::filesystem::path trace;   // directory written by simulate
  std::vector<int> k_list;
  std::filesystem::path out;
};

int cmd_simulate(const SimulateRequest& request, std::ostream& log);
int cmd_estimate(const EstimateRequest& request, std::ostream& log);
int cmd_report(const std::vector<std::filesystem::path>& run_dirs,
               const std::filesystem::path& out, std::ostream& log);

/// One agent's view of the first control segment, enough to re-run the MLE.
struct SweepAgent {
  int index = 0;
  Eigen::VectorXd belief;                // z0 + E_i, or z0 under complete information
  std::vector<Eigen::VectorXd> samples;  // x at l * dt_obs
  ErrorVector truth;
  // First-segment prediction and law when already at hand; solved from
  // `belief` otherwise. Must outlive the sweep.
  const MFPrediction* prediction = nullptr;
  const ControlLaw* law = nullptr;
};

/// Estimate sweep table: one row per (k, agent), estimating from the first
/// k observation windows. Columns: k, agent_id, Ebar_hat_*, Ei_hat_*,
/// identifiable, clamped, Ebar_true_*, Ei_true_*, abs_error, cramer_rao.
std::string estimate_sweep_csv(const FlowSet& flows, double bound,
                               const std::vector<SweepAgent>& agents,
                               const std::vector<int>& k_list, int threads);

/// CSV files of one simulated run; returns the file names written.
std::vector<std::string> write_run_csvs(const RunConfig& config, const FlowSet& flows,
                                        const PopulationTrace& trace,
                                        const std::filesystem::path& dir,
                                        const std::vector<int>& k_list, int threads);

/// Regenerates every chart of a run directory from its CSV files alone.
std::vector<std::string> render_charts(const std::filesystem::path& dir,
                                       std::string_view run_label);

/// Simulates one (config, seed) into `dir` with manifest; returns the exit code.
int run_simulation(const RunConfig& config, const std::filesystem::path& dir,
                   const std::vector<int>& k_list, int threads, std::ostream& log);

}  // namespace ietmfc::app
