#include "ietmfc/meanfield.hpp"

#include <algorithm>
#include <stdexcept>

namespace ietmfc {
namespace {

using Matrix = Eigen::MatrixXd;

GridFunction ubar_of(const FlowSet& fs, const GridFunction& z) {
  std::vector<Matrix> nodes;
  std::vector<Matrix> mids;
  nodes.reserve(z.size());
  for (long k = z.first_node(); k <= z.last_node(); ++k) {
    nodes.push_back(-fs.m.Rinv_Bt * (fs.P0.at(k) * z.at(k) + fs.G.at(k)));
    if (k < z.last_node()) {
      const long j = 2 * k + 1;
      mids.push_back(-fs.m.Rinv_Bt * (fs.P0.at_half(j) * z.midpoint(k) + fs.G.at_half(j)));
    }
  }
  return GridFunction(z.step(), z.first_node(), std::move(nodes), std::move(mids));
}

}  // namespace

Eigen::VectorXd ControlLaw::feedback(const Eigen::VectorXd& x, long node) const {
  return -Rinv_Bt * (P1->at(node) * x + g.at(node));
}

MFPrediction predict_mf(const FlowSet& fs, const Eigen::VectorXd& z_start,
                        long start_node) {
  if (start_node < 0 || start_node >= fs.last_node()) {
    throw std::invalid_argument("predict_mf: start must lie in [0, T)");
  }
  const DerivedMatrices& m = fs.m;
  auto rhs = [&](long j, const Matrix& z) -> Matrix {
    return (m.A_plus_C - m.SF * fs.P0.at_half(j)) * z - m.SF * fs.G.at_half(j);
  };
  MFPrediction out;
  out.start_node = start_node;
  out.z = integrate_matrix_ode(rhs, z_start, Direction::forward, start_node,
                               fs.last_node(), fs.step());
  out.ubar = ubar_of(fs, out.z);
  return out;
}

ControlLaw solve_offset(const FlowSet& fs, const MFPrediction& pred) {
  const DerivedMatrices& m = fs.m;
  const SystemParams& p = fs.params;
  const Matrix At = p.A.transpose();
  const long last = fs.last_node();
  auto rhs = [&](long j, const Matrix& g) -> Matrix {
    const Matrix& P1 = fs.P1.at_half(j);
    return -((At - P1 * m.S) * g + (P1 * p.C - m.Q_Gamma) * pred.z.at_half(j) +
             P1 * p.F * pred.ubar.at_half(j) - m.nu);
  };
  const Matrix terminal =
      -p.Qbar_I * p.sbar - p.Qbar * (p.GammaBar * pred.z.at(last) + p.etaBar);

  ControlLaw law;
  law.P1 = &fs.P1;
  law.Rinv_Bt = m.Rinv_Bt;
  law.g = integrate_matrix_ode(rhs, terminal, Direction::backward, pred.start_node,
                               last, fs.step());
  law.valid_from = pred.start_node;
  law.valid_to = last;
  return law;
}

ActualMeanField actual_mf_system(const FlowSet& fs, const Eigen::VectorXd& z0,
                                 const Eigen::VectorXd& Ebar) {
  const DerivedMatrices& m = fs.m;
  const SystemParams& p = fs.params;
  const Matrix At = p.A.transpose();
  const long last = fs.last_node();

  ActualMeanField out;
  out.z_bar = predict_mf(fs, z0 + Ebar, 0).z;

  const GridFunction& zbar = out.z_bar;
  auto g_rhs = [&](long j, const Matrix& g) -> Matrix {
    const Matrix& P1 = fs.P1.at_half(j);
    const Matrix& zb = zbar.at_half(j);
    return -((At - P1 * m.S) * g + (P1 * p.C - m.Q_Gamma) * zb -
             P1 * m.FRinv_Bt * (P1 * zb + g) - m.nu);
  };
  const Matrix g_terminal =
      -p.Qbar_I * p.sbar - p.Qbar * (p.GammaBar * zbar.at(last) + p.etaBar);
  out.g_bar = integrate_matrix_ode(g_rhs, g_terminal, Direction::backward, 0, last,
                                   fs.step());

  const GridFunction& gbar = out.g_bar;
  auto z_rhs = [&](long j, const Matrix& z) -> Matrix {
    return (m.A_plus_C - m.SF * fs.P1.at_half(j)) * z - m.SF * gbar.at_half(j);
  };
  out.z_actual = integrate_matrix_ode(z_rhs, z0, Direction::forward, 0, last, fs.step());
  return out;
}

GridFunction actual_mf(const FlowSet& fs, const Eigen::VectorXd& z0,
                       const Eigen::VectorXd& Ebar) {
  return actual_mf_system(fs, z0, Ebar).z_actual;
}

double dual_representation_check(const FlowSet& fs, const MFPrediction& pred,
                                 const ControlLaw& law) {
  double worst = 0.0;
  for (long k = pred.z.first_node(); k <= pred.z.last_node(); ++k) {
    const Matrix& z = pred.z.at(k);
    const Matrix diff = fs.P0.at(k) * z + fs.G.at(k) - (fs.P1.at(k) * z + law.g.at(k));
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace ietmfc
