#pragma once

#include "ietmfc/grid_function.hpp"
#include "ietmfc/meanfield.hpp"
#include "ietmfc/model.hpp"
#include "ietmfc/odeflow.hpp"

#include <Eigen/Dense>

namespace ietmfc {

/// Linear maps from the information errors present at `anchor` to the
/// deviations they cause on [anchor, T]:
///   offset        g_i - g     = Mg  E_i
///   actual mean   z_A - z     = Mz  Ebar
///   private drift             = Kbar Ebar + Ki E_i
/// All members are nodes-only grid functions on [anchor, T].
struct KernelSet {
  long anchor = 0;
  GridFunction Mg;
  GridFunction Mz;
  GridFunction Kbar;
  GridFunction Ki;
  GridFunction Phi1_rel;  // Phi1(t) Phi1^{-1}(anchor)

  /// Horizontal stack [Kbar(t), Ki(t)], n x 2n.
  Eigen::MatrixXd K(long node) const;
};

KernelSet build_kernels(const FlowSet& flows, long anchor_node);

struct Unobservables {
  GridFunction z_actual;
  GridFunction g_bar;
};

/// Rebuilds the actual mean field and the average offset from an agent's own
/// prediction and law plus a hypothesised error E.
Unobservables reconstruct_unobservables(const KernelSet& kernels,
                                        const MFPrediction& prediction,
                                        const ControlLaw& law, const ErrorVector& E);

}  // namespace ietmfc
