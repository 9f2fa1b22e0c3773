#pragma once

#include "ietmfc/grid_function.hpp"
#include "ietmfc/odeflow.hpp"

#include <Eigen/Dense>

namespace ietmfc {

/// Mean field an agent predicts from a believed state z_start at start_node,
/// assuming every other agent shares that belief.
struct MFPrediction {
  GridFunction z;     // predicted mean state on [start_node, T]
  GridFunction ubar;  // -R^{-1}B^T (P0 z + G)
  long start_node = 0;
};

/// Feedback u = -R^{-1} B^T (P1(t) x + g(t)) for t in [valid_from, valid_to].
///
/// Holds a non-owning pointer to the FlowSet's P1, so the FlowSet must outlive
/// the law and must not be moved while laws refer to it.
struct ControlLaw {
  const GridFunction* P1 = nullptr;
  Eigen::MatrixXd Rinv_Bt;
  GridFunction g;
  long valid_from = 0;
  long valid_to = 0;

  Eigen::VectorXd feedback(const Eigen::VectorXd& x, long node) const;
};

/// Forward solve of the equilibrium mean-field equation from (start_node, z_start).
MFPrediction predict_mf(const FlowSet& flows, const Eigen::VectorXd& z_start,
                        long start_node);

/// Backward solve of the individual offset g for a predicted mean field,
/// with terminal value -Qbar_I sbar - Qbar (GammaBar z(T) + etaBar).
ControlLaw solve_offset(const FlowSet& flows, const MFPrediction& prediction);

/// Infinite-population behaviour when agents start from heterogeneous beliefs
/// whose average error is `Ebar`.
struct ActualMeanField {
  GridFunction z_actual;  // z_A
  GridFunction z_bar;     // average predicted mean field
  GridFunction g_bar;     // average offset
};

/// Solves z_bar forward, then g_bar backward, then z_A forward.
ActualMeanField actual_mf_system(const FlowSet& flows, const Eigen::VectorXd& z0,
                                 const Eigen::VectorXd& Ebar);
GridFunction actual_mf(const FlowSet& flows, const Eigen::VectorXd& z0,
                       const Eigen::VectorXd& Ebar);

/// max_t |P0 z + G - (P1 z + g)| over the prediction's nodes.
double dual_representation_check(const FlowSet& flows, const MFPrediction& prediction,
                                 const ControlLaw& law);

}  // namespace ietmfc
