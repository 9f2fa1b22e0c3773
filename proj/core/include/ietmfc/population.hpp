#pragma once

#include "ietmfc/estimation.hpp"
#include "ietmfc/grid_function.hpp"
#include "ietmfc/meanfield.hpp"
#include "ietmfc/model.hpp"
#include "ietmfc/odeflow.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace ietmfc {

enum class Regime { complete, erroneous, iet_dmfc };

std::string_view to_string(Regime regime);
/// Accepts "complete", "erroneous", "iet-dmfc" and "iet_dmfc".
std::optional<Regime> parse_regime(std::string_view text);

struct PopulationDraw {
  std::vector<Eigen::VectorXd> x0;
  std::vector<Eigen::VectorXd> errors;
};

/// N draws of x0 ~ Normal(z0, init_covariance) and E_i ~ Normal(Ebar,
/// private_variance), agent i using its own substreams of `seed`.
PopulationDraw sample_population(const InitSpec& init, const ErrorSpec& err,
                                 std::uint64_t seed);

/// What an agent did at the end of one control segment.
struct SegmentRecord {
  int segment = 0;
  long anchor_node = 0;  // k_j
  long end_node = 0;     // k_{j+1}, where the law was refreshed
  EstimationResult estimate;
  ErrorVector applied;             // estimate used; zero when unidentifiable
  Eigen::VectorXd state_estimate;  // corrected mean-field state at end_node
  Eigen::VectorXd actual_state;    // empirical mean state at end_node
  ErrorVector true_error;          // errors the agent carried into the segment
};

/// Predicted mean field sampled at the observation instants from start_node on.
struct PredictionRecord {
  long start_node = 0;
  std::vector<Eigen::VectorXd> z_obs;
};

struct AgentRecord {
  int index = 0;
  Eigen::VectorXd x0;
  Eigen::VectorXd E_i;
  MFPrediction prediction;  // current segment
  ControlLaw law;           // current segment
  std::vector<Eigen::VectorXd> samples;  // x at l * dt_obs, l = 0..N_t
  std::vector<SegmentRecord> segments;
  std::vector<PredictionRecord> predictions;
};

struct PopulationTrace {
  Regime regime = Regime::complete;
  std::vector<AgentRecord> agents;
  GridFunction empirical_z;     // nodes only
  GridFunction empirical_ubar;  // nodes only
  Eigen::VectorXd realized_mean_error;
  std::vector<long> modification_nodes;
};

struct SimulationOptions {
  int threads = 1;
  /// Each Brownian increment is the sum of this many finer increments, which
  /// lets runs at h and h / r share one Brownian path.
  int noise_refinement = 1;
  bool record_predictions = true;
};

/// Euler-Maruyama simulation of the finite population.
///
/// complete:  every agent predicts from the true z0.
/// erroneous: agent i predicts from z0 + E_i and never revises.
/// iet_dmfc:  as erroneous, and at every modification point each agent
///            estimates its segment errors from its own samples, corrects its
///            mean-field state and refreshes its law.
/// The result is a pure function of (scenario, regime, seed) and does not
/// depend on `options.threads`. `flows` must outlive the trace.
PopulationTrace simulate(const Scenario& scenario, Regime regime, const FlowSet& flows,
                         std::uint64_t seed, const SimulationOptions& options = {});

/// sqrt(int_0^T |a(t) - b(t)|^2 dt) with the trapezoidal rule on shared nodes.
double l2_distance(const GridFunction& a, const GridFunction& b);

}  // namespace ietmfc
