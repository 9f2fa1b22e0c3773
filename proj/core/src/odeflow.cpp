#include "ietmfc/odeflow.hpp"

#include "ietmfc/errors.hpp"

#include <string>
#include <vector>

namespace ietmfc {
namespace {

void require_finite(const Eigen::MatrixXd& y, long node, double h) {
  if (!y.allFinite()) {
    throw NonFiniteBlowup("ODE solution became non-finite at t = " +
                          std::to_string(static_cast<double>(node) * h));
  }
}

using Matrix = Eigen::MatrixXd;

// Companion equation of dPhi = M Phi: the inverse-flow obeys dPsi = -Psi M.
template <typename CoefficientAt>
GridFunction flow(CoefficientAt coefficient, Direction direction, const TimeGrid& grid,
                  Eigen::Index n) {
  const Matrix I = Matrix::Identity(n, n);
  return integrate_matrix_ode(
      [&](long j, const Matrix& y) -> Matrix { return coefficient(j) * y; }, I,
      direction, 0, grid.last_node(), grid.step());
}

template <typename CoefficientAt>
GridFunction inverse_flow(CoefficientAt coefficient, Direction direction,
                          const TimeGrid& grid, Eigen::Index n) {
  const Matrix I = Matrix::Identity(n, n);
  return integrate_matrix_ode(
      [&](long j, const Matrix& y) -> Matrix { return -(y * coefficient(j)); }, I,
      direction, 0, grid.last_node(), grid.step());
}

}  // namespace

GridFunction integrate_matrix_ode(const MatrixField& rhs, const Matrix& anchor_value,
                                  Direction direction, long first_node,
                                  long last_node, double h) {
  if (last_node < first_node) {
    throw std::invalid_argument("integrate_matrix_ode: empty node range");
  }
  require_finite(anchor_value, direction == Direction::forward ? first_node : last_node,
                 h);
  const std::size_t count = static_cast<std::size_t>(last_node - first_node + 1);
  std::vector<Matrix> y(count);
  std::vector<Matrix> dy(count);

  if (direction == Direction::forward) {
    y[0] = anchor_value;
    for (std::size_t i = 0; i + 1 < count; ++i) {
      const long j = 2 * (first_node + static_cast<long>(i));
      const Matrix& yi = y[i];
      Matrix k1 = rhs(j, yi);
      Matrix k2 = rhs(j + 1, yi + (0.5 * h) * k1);
      Matrix k3 = rhs(j + 1, yi + (0.5 * h) * k2);
      Matrix k4 = rhs(j + 2, yi + h * k3);
      y[i + 1] = yi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      require_finite(y[i + 1], first_node + static_cast<long>(i) + 1, h);
      dy[i] = std::move(k1);
    }
    dy[count - 1] = rhs(2 * last_node, y[count - 1]);
  } else {
    y[count - 1] = anchor_value;
    for (std::size_t i = count - 1; i > 0; --i) {
      const long j = 2 * (first_node + static_cast<long>(i));
      const Matrix& yi = y[i];
      Matrix k1 = rhs(j, yi);
      Matrix k2 = rhs(j - 1, yi - (0.5 * h) * k1);
      Matrix k3 = rhs(j - 1, yi - (0.5 * h) * k2);
      Matrix k4 = rhs(j - 2, yi - h * k3);
      y[i - 1] = yi - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      require_finite(y[i - 1], first_node + static_cast<long>(i) - 1, h);
      dy[i] = std::move(k1);
    }
    dy[0] = rhs(2 * first_node, y[0]);
  }

  std::vector<Matrix> mid;
  mid.reserve(count - 1);
  for (std::size_t i = 0; i + 1 < count; ++i) {
    mid.push_back(0.5 * (y[i] + y[i + 1]) + (h / 8.0) * (dy[i] - dy[i + 1]));
  }
  return GridFunction(h, first_node, std::move(y), std::move(mid));
}

DerivedMatrices derive(const SystemParams& p) {
  DerivedMatrices m;
  const Matrix Rinv = p.R.llt().solve(Matrix::Identity(p.R.rows(), p.R.cols()));
  m.Rinv_Bt = Rinv * p.B.transpose();
  m.S = p.B * m.Rinv_Bt;
  m.SF = (p.B + p.F) * m.Rinv_Bt;
  m.FRinv_Bt = p.F * m.Rinv_Bt;
  m.A_plus_C = p.A + p.C;
  m.Q_Gamma = p.Q * p.Gamma;
  m.Qbar_GammaBar = p.Qbar * p.GammaBar;
  m.nu = p.Q_I * p.s + p.Q * p.eta;
  m.P1_terminal = p.Qbar_I + p.Qbar;
  m.P0_terminal = p.Qbar_I + p.Qbar - m.Qbar_GammaBar;
  m.G_terminal = -p.Qbar_I * p.sbar - p.Qbar * p.etaBar;
  return m;
}

GridFunction solve_p1(const SystemParams& p, const TimeGrid& grid) {
  const DerivedMatrices m = derive(p);
  const Matrix running = p.Q_I + p.Q;
  auto rhs = [&](long, const Matrix& P) -> Matrix {
    return -(P * p.A + p.A.transpose() * P + running - P * m.S * P);
  };
  return integrate_matrix_ode(rhs, m.P1_terminal, Direction::backward, 0,
                              grid.last_node(), grid.step());
}

GridFunction solve_p0(const SystemParams& p, const TimeGrid& grid) {
  const DerivedMatrices m = derive(p);
  const Matrix running = p.Q_I + p.Q - m.Q_Gamma;
  auto rhs = [&](long, const Matrix& P) -> Matrix {
    return -(P * m.A_plus_C + p.A.transpose() * P + running - P * m.SF * P);
  };
  return integrate_matrix_ode(rhs, m.P0_terminal, Direction::backward, 0,
                              grid.last_node(), grid.step());
}

GridFunction solve_G(const SystemParams& p, const TimeGrid& grid,
                     const GridFunction& P0) {
  const DerivedMatrices m = derive(p);
  const Matrix At = p.A.transpose();
  auto rhs = [&](long j, const Matrix& G) -> Matrix {
    return -(At - P0.at_half(j) * m.SF) * G + m.nu;
  };
  return integrate_matrix_ode(rhs, m.G_terminal, Direction::backward, 0,
                              grid.last_node(), grid.step());
}

Eigen::MatrixXd FlowSet::phi1_transfer(long t_node, long s_node) const {
  return Phi1.at(t_node) * Phi1_inv.at(s_node);
}

FlowSet fundamental_flows(const SystemParams& p, const TimeGrid& grid,
                          GridFunction P0, GridFunction P1, GridFunction G) {
  FlowSet fs;
  fs.params = p;
  fs.grid = grid;
  fs.m = derive(p);
  fs.P0 = std::move(P0);
  fs.P1 = std::move(P1);
  fs.G = std::move(G);

  const Eigen::Index n = p.state_dim();
  const DerivedMatrices& m = fs.m;
  const Matrix At = p.A.transpose();
  const GridFunction& P0r = fs.P0;
  const GridFunction& P1r = fs.P1;

  auto m1 = [&](long j) -> Matrix { return m.A_plus_C - m.SF * P0r.at_half(j); };
  auto mg = [&](long j) -> Matrix { return -(At - P1r.at_half(j) * m.SF); };
  auto mz = [&](long j) -> Matrix { return m.A_plus_C - m.SF * P1r.at_half(j); };
  auto mx = [&](long j) -> Matrix { return p.A - m.S * P1r.at_half(j); };

  fs.Phi1 = flow(m1, Direction::forward, grid, n);
  fs.Phi1_inv = inverse_flow(m1, Direction::forward, grid, n);
  fs.Phig = flow(mg, Direction::backward, grid, n);
  fs.Phig_inv = inverse_flow(mg, Direction::backward, grid, n);
  fs.Phiz = flow(mz, Direction::forward, grid, n);
  fs.Phiz_inv = inverse_flow(mz, Direction::forward, grid, n);
  fs.Phix = flow(mx, Direction::forward, grid, n);
  fs.Phix_inv = inverse_flow(mx, Direction::forward, grid, n);
  return fs;
}

FlowSet solve_flowset(const SystemParams& p, const TimeGrid& grid) {
  GridFunction P1 = solve_p1(p, grid);
  GridFunction P0 = solve_p0(p, grid);
  GridFunction G = solve_G(p, grid, P0);
  return fundamental_flows(p, grid, std::move(P0), std::move(P1), std::move(G));
}

}  // namespace ietmfc
