#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ietmfc {

/// Linear dynamics and quadratic cost of the population game.
///
/// Agent i evolves as
///   dx_i = (A x_i + B u_i + C z + F ubar) dt + D dW_i
/// and minimises the running cost |x-s|_{Q_I} + |u|_R + |x-(Gamma z+eta)|_Q
/// plus the terminal cost with (Qbar_I, sbar, Qbar, GammaBar, etaBar) at T.
struct SystemParams {
  Eigen::MatrixXd A, B, C, F, D;
  Eigen::MatrixXd Q_I, Q, Qbar_I, Qbar, R;
  Eigen::MatrixXd Gamma, GammaBar;
  Eigen::VectorXd s, sbar, eta, etaBar;
  double T = 0.0;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index control_dim() const { return B.cols(); }
};

/// Observation and integration lattice.
///
/// Observations are taken every `dt_obs`; the deterministic and stochastic
/// integrators step with `h`, which must divide `dt_obs`. Grid nodes are
/// addressed by integer index, node k sitting at time k * step().
/// `mod_points` holds the modification indices k_1 < ... < k_d in units of
/// observations; k_0 = 0 is implied and never stored.
struct TimeGrid {
  double dt_obs = 0.02;
  int n_obs = 100;
  double h = 1e-3;
  std::vector<int> mod_points;

  /// Integrator steps per observation interval (dt_obs / h rounded).
  int substeps() const;
  /// Effective integrator step dt_obs / substeps(); grid-aligned by construction.
  double step() const { return dt_obs / substeps(); }
  long last_node() const { return static_cast<long>(n_obs) * substeps(); }
  long obs_node(int l) const { return static_cast<long>(l) * substeps(); }
  double horizon() const { return n_obs * dt_obs; }
};

/// Distribution of the initial information errors E_i and the admissible
/// box Lambda = [-bound, bound]^{2n}.
struct ErrorSpec {
  Eigen::VectorXd mean_error;
  Eigen::MatrixXd private_variance;
  double bound = 100.0;
};

/// Distribution of the agents' initial states.
struct InitSpec {
  Eigen::VectorXd z0;
  Eigen::MatrixXd init_covariance;
  int N = 100;
  std::uint64_t master_seed = 1;
  /// Shift sampled x0 and E_i so their sample means equal z0 and mean_error.
  bool recenter = false;
};

struct Scenario {
  SystemParams params;
  TimeGrid grid;
  ErrorSpec errors;
  InitSpec init;
};

/// Stacked information error E = (Ebar, E_i) in R^{2n}.
struct ErrorVector {
  Eigen::VectorXd mean;     // Ebar
  Eigen::VectorXd priv;     // E_i

  static ErrorVector zero(Eigen::Index n);
  static ErrorVector from_stacked(const Eigen::VectorXd& stacked);
  Eigen::VectorXd stacked() const;
};

struct ValidationReport {
  std::vector<std::string> problems;

  bool ok() const { return problems.empty(); }
  bool mentions(std::string_view fragment) const;
};

/// Checks every scenario invariant; never throws.
ValidationReport validate(const SystemParams& params, const TimeGrid& grid,
                          const ErrorSpec& err, const InitSpec& init);
ValidationReport validate(const Scenario& scenario);

/// The scalar population used throughout the examples and acceptance suite:
/// A=R=s=sbar=1, C=-1, B=F=Q_I=Qbar_I=0.5, Q=Qbar=eta=etaBar=0.1,
/// Gamma=GammaBar=1, T=2, dt=0.02, 100 agents, z0=0 with variance 0.1,
/// errors with mean 10 and variance 2. The diffusion is not part of that
/// description and defaults to D=0.1 here.
Scenario reference_scenario();

}  // namespace ietmfc
