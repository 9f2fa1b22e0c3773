#include "ietmfc/propagation.hpp"

#include <stdexcept>
#include <vector>

namespace ietmfc {
namespace {

using Matrix = Eigen::MatrixXd;

// Offset kernel for errors present at time 0, on the whole grid.
//   Mg(t) = -Phig(t) [Phig^{-1}(T) QbarGammaBar Phi1(T) Phi1^{-1}(0)
//                     + int_T^t Phig^{-1}(s) W(s) Phi1(s) Phi1^{-1}(0) ds]
// with W = P1 C - P1 F R^{-1} B^T P1 - Q Gamma. The integral is accumulated
// backwards from T with Simpson's rule, reading the integrand at interval
// midpoints from the flows' half-step lattice.
std::vector<Matrix> offset_kernel_from_zero(const FlowSet& fs) {
  const SystemParams& p = fs.params;
  const long last = fs.last_node();
  const double h = fs.step();
  const Matrix phi1_inv0 = fs.Phi1_inv.at(0);

  auto integrand = [&](long half) -> Matrix {
    const Matrix& P1 = fs.P1.at_half(half);
    const Matrix W = P1 * p.C - P1 * fs.m.FRinv_Bt * P1 - fs.m.Q_Gamma;
    return fs.Phig_inv.at_half(half) * W * fs.Phi1.at_half(half) * phi1_inv0;
  };

  const Matrix terminal =
      fs.Phig_inv.at(last) * fs.m.Qbar_GammaBar * fs.Phi1.at(last) * phi1_inv0;
  std::vector<Matrix> Mg(static_cast<std::size_t>(last + 1));
  Matrix acc = Matrix::Zero(terminal.rows(), terminal.cols());
  Matrix f_next = integrand(2 * last);
  Mg[static_cast<std::size_t>(last)] = -fs.Phig.at(last) * terminal;
  for (long k = last - 1; k >= 0; --k) {
    Matrix f = integrand(2 * k);
    acc -= (h / 6.0) * (f + 4.0 * integrand(2 * k + 1) + f_next);
    Mg[static_cast<std::size_t>(k)] = -fs.Phig.at(k) * (terminal + acc);
    f_next = std::move(f);
  }
  return Mg;
}

}  // namespace

Eigen::MatrixXd KernelSet::K(long node) const {
  const Matrix& kb = Kbar.at(node);
  const Matrix& ki = Ki.at(node);
  Matrix out(kb.rows(), kb.cols() + ki.cols());
  out << kb, ki;
  return out;
}

KernelSet build_kernels(const FlowSet& fs, long anchor) {
  const long last = fs.last_node();
  if (anchor < 0 || anchor > last) {
    throw std::invalid_argument("build_kernels: anchor outside the grid");
  }
  const SystemParams& p = fs.params;
  const double h = fs.step();
  const std::vector<Matrix> Mg0 = offset_kernel_from_zero(fs);

  // Errors present at the anchor act like initial errors mapped back through
  // Phi1: Mg^a(t) = Mg(t) Phi1(0) Phi1^{-1}(a).
  const Matrix reanchor = fs.Phi1.at(0) * fs.Phi1_inv.at(anchor);
  const Matrix phi1_inv_a = fs.Phi1_inv.at(anchor);

  const std::size_t count = static_cast<std::size_t>(last - anchor + 1);
  std::vector<Matrix> Mg, Mz, Kbar, Ki, rel;
  Mg.reserve(count);
  Mz.reserve(count);
  Kbar.reserve(count);
  Ki.reserve(count);
  rel.reserve(count);

  // Mz^a(t) = -Phiz(t) int_a^t Phiz^{-1}(s) SF Mg^a(s) ds, forward trapezoid.
  Matrix acc;
  Matrix f_prev;
  for (long k = anchor; k <= last; ++k) {
    Matrix mg = Mg0[static_cast<std::size_t>(k)] * reanchor;
    Matrix f = fs.Phiz_inv.at(k) * fs.m.SF * mg;
    if (k == anchor) {
      acc = Matrix::Zero(f.rows(), f.cols());
    } else {
      acc += (0.5 * h) * (f_prev + f);
    }
    Matrix mz = -fs.Phiz.at(k) * acc;

    const Matrix coupling = p.C - fs.m.FRinv_Bt * fs.P1.at(k);
    Matrix phi_rel = fs.Phi1.at(k) * phi1_inv_a;
    Kbar.push_back(coupling * mz - fs.m.FRinv_Bt * mg);
    Ki.push_back(fs.m.FRinv_Bt * mg - coupling * phi_rel);
    Mg.push_back(std::move(mg));
    Mz.push_back(std::move(mz));
    rel.push_back(std::move(phi_rel));
    f_prev = std::move(f);
  }

  KernelSet ks;
  ks.anchor = anchor;
  ks.Mg = GridFunction(h, anchor, std::move(Mg));
  ks.Mz = GridFunction(h, anchor, std::move(Mz));
  ks.Kbar = GridFunction(h, anchor, std::move(Kbar));
  ks.Ki = GridFunction(h, anchor, std::move(Ki));
  ks.Phi1_rel = GridFunction(h, anchor, std::move(rel));
  return ks;
}

Unobservables reconstruct_unobservables(const KernelSet& ks, const MFPrediction& pred,
                                        const ControlLaw& law, const ErrorVector& E) {
  const long first = std::max({ks.anchor, pred.z.first_node(), law.g.first_node()});
  const long last = ks.Mz.last_node();
  const double h = ks.Mz.step();
  std::vector<Matrix> z, g;
  z.reserve(static_cast<std::size_t>(last - first + 1));
  g.reserve(static_cast<std::size_t>(last - first + 1));
  const Eigen::VectorXd spread = E.mean - E.priv;
  for (long k = first; k <= last; ++k) {
    z.push_back(pred.z.at(k) + ks.Mz.at(k) * E.mean - ks.Phi1_rel.at(k) * E.priv);
    g.push_back(law.g.at(k) + ks.Mg.at(k) * spread);
  }
  return {GridFunction(h, first, std::move(z)), GridFunction(h, first, std::move(g))};
}

}  // namespace ietmfc
