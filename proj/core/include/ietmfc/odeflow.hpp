#pragma once

#include "ietmfc/grid_function.hpp"
#include "ietmfc/model.hpp"

#include <Eigen/Dense>

#include <functional>

namespace ietmfc {

enum class Direction { forward, backward };

/// Right-hand side dY/dt = f(t, Y). The time is passed as an index into the
/// lattice of half steps (t = half_index * h / 2) so that coefficient
/// functions can be looked up exactly.
using MatrixField =
    std::function<Eigen::MatrixXd(long half_index, const Eigen::MatrixXd& y)>;

/// Classical RK4 on nodes [first_node, last_node] with step h.
///
/// A forward solve starts from `anchor_value` at first_node, a backward solve
/// at last_node. Interval midpoints of the result are filled with the cubic
/// Hermite continuation of the RK4 step (fourth-order accurate).
/// Throws NonFiniteBlowup as soon as any entry stops being finite.
GridFunction integrate_matrix_ode(const MatrixField& rhs,
                                  const Eigen::MatrixXd& anchor_value,
                                  Direction direction, long first_node,
                                  long last_node, double h);

/// Constant products of the model matrices that appear in every equation.
struct DerivedMatrices {
  Eigen::MatrixXd Rinv_Bt;     // R^{-1} B^T
  Eigen::MatrixXd S;           // B R^{-1} B^T
  Eigen::MatrixXd SF;          // (B + F) R^{-1} B^T
  Eigen::MatrixXd FRinv_Bt;    // F R^{-1} B^T
  Eigen::MatrixXd A_plus_C;
  Eigen::MatrixXd Q_Gamma;
  Eigen::MatrixXd Qbar_GammaBar;
  Eigen::VectorXd nu;          // Q_I s + Q eta
  Eigen::MatrixXd P1_terminal;
  Eigen::MatrixXd P0_terminal;
  Eigen::VectorXd G_terminal;  // -Qbar_I sbar - Qbar etaBar
};

DerivedMatrices derive(const SystemParams& params);

/// P1 of the individual feedback law; terminal value Qbar_I + Qbar.
GridFunction solve_p1(const SystemParams& params, const TimeGrid& grid);
/// P0 of the equilibrium mean field; terminal value Qbar_I + Qbar - Qbar GammaBar.
GridFunction solve_p0(const SystemParams& params, const TimeGrid& grid);
/// Equilibrium offset G driven by P0.
GridFunction solve_G(const SystemParams& params, const TimeGrid& grid,
                     const GridFunction& P0);

/// Everything deterministic an agent can precompute from the model alone.
/// Immutable once built; the flows carry their inverse-flows.
struct FlowSet {
  SystemParams params;
  TimeGrid grid;
  DerivedMatrices m;
  GridFunction P0, P1, G;
  GridFunction Phi1, Phi1_inv;  // predicted mean field, anchored at 0
  GridFunction Phig, Phig_inv;  // mean offset, anchored at T
  GridFunction Phiz, Phiz_inv;  // actual mean field, anchored at 0
  GridFunction Phix, Phix_inv;  // private closed-loop state, anchored at 0

  long last_node() const { return grid.last_node(); }
  double step() const { return grid.step(); }
  /// Phi1(t) Phi1^{-1}(s).
  Eigen::MatrixXd phi1_transfer(long t_node, long s_node) const;
};

FlowSet fundamental_flows(const SystemParams& params, const TimeGrid& grid,
                          GridFunction P0, GridFunction P1, GridFunction G);

/// solve_p1, solve_p0, solve_G and fundamental_flows in one call.
FlowSet solve_flowset(const SystemParams& params, const TimeGrid& grid);

}  // namespace ietmfc
