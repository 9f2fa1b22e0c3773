#pragma once

#include "ietmfc/model.hpp"

#include <Eigen/Dense>

namespace testing_support {

inline Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }
inline Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

/// The reference scalar scenario with a coarser or finer integrator step.
inline ietmfc::Scenario reference_with_step(double h) {
  ietmfc::Scenario sc = ietmfc::reference_scenario();
  sc.grid.h = h;
  return sc;
}

/// All cost weights and targets zero, so P1 = P0 = G = 0 and every offset
/// vanishes; the closed loop is dx = (A x + C z) dt + D dW.
inline ietmfc::Scenario zero_cost(double a, double c, double d) {
  ietmfc::Scenario sc = ietmfc::reference_scenario();
  auto& p = sc.params;
  p.A = scalar(a);
  p.C = scalar(c);
  p.D = scalar(d);
  for (auto* m : {&p.Q_I, &p.Q, &p.Qbar_I, &p.Qbar}) *m = scalar(0.0);
  for (auto* v : {&p.s, &p.sbar, &p.eta, &p.etaBar}) *v = vec1(0.0);
  return sc;
}

/// A two-dimensional scenario exercising the matrix code paths.
inline ietmfc::Scenario planar() {
  ietmfc::Scenario sc = ietmfc::reference_scenario();
  auto& p = sc.params;
  p.A = (Eigen::MatrixXd(2, 2) << 0.5, 0.2, -0.3, 0.4).finished();
  p.B = (Eigen::MatrixXd(2, 1) << 0.6, 0.3).finished();
  p.C = (Eigen::MatrixXd(2, 2) << -0.8, 0.1, 0.0, -0.5).finished();
  p.F = (Eigen::MatrixXd(2, 1) << 0.4, 0.2).finished();
  p.D = 0.1 * Eigen::MatrixXd::Identity(2, 2);
  p.Q_I = 0.5 * Eigen::MatrixXd::Identity(2, 2);
  p.Q = 0.1 * Eigen::MatrixXd::Identity(2, 2);
  p.Qbar_I = 0.5 * Eigen::MatrixXd::Identity(2, 2);
  p.Qbar = 0.1 * Eigen::MatrixXd::Identity(2, 2);
  p.R = Eigen::MatrixXd::Identity(1, 1);
  p.Gamma = Eigen::MatrixXd::Identity(2, 2);
  p.GammaBar = Eigen::MatrixXd::Identity(2, 2);
  p.s = Eigen::VectorXd::Ones(2);
  p.sbar = Eigen::VectorXd::Ones(2);
  p.eta = Eigen::VectorXd::Constant(2, 0.1);
  p.etaBar = Eigen::VectorXd::Constant(2, 0.1);
  sc.errors.mean_error = Eigen::VectorXd::Constant(2, 5.0);
  sc.errors.private_variance = Eigen::MatrixXd::Identity(2, 2);
  sc.init.z0 = Eigen::VectorXd::Zero(2);
  sc.init.init_covariance = 0.1 * Eigen::MatrixXd::Identity(2, 2);
  sc.init.N = 20;
  return sc;
}

}  // namespace testing_support
