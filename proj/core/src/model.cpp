#include "ietmfc/model.hpp"

#include <cmath>
#include <string>

namespace ietmfc {
namespace {

constexpr double kSymmetryTol = 1e-12;

bool is_symmetric(const Eigen::MatrixXd& m) {
  return m.rows() == m.cols() &&
         (m - m.transpose()).cwiseAbs().maxCoeff() <=
             kSymmetryTol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

bool is_psd(const Eigen::MatrixXd& m) {
  if (!is_symmetric(m)) return false;
  if (m.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return eig.eigenvalues().minCoeff() >= -1e-12 * scale;
}

class Checker {
 public:
  explicit Checker(ValidationReport& report) : report_(report) {}

  void require(bool cond, std::string message) {
    if (!cond) report_.problems.push_back(std::move(message));
  }

  bool shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols,
             const char* name) {
    if (m.rows() == rows && m.cols() == cols) {
      require(m.allFinite(), std::string(name) + " has non-finite entries");
      return true;
    }
    report_.problems.push_back(std::string(name) + " must be " +
                               std::to_string(rows) + "x" + std::to_string(cols) +
                               ", got " + std::to_string(m.rows()) + "x" +
                               std::to_string(m.cols()));
    return false;
  }

  bool length(const Eigen::VectorXd& v, Eigen::Index n, const char* name) {
    if (v.size() == n) {
      require(v.allFinite(), std::string(name) + " has non-finite entries");
      return true;
    }
    report_.problems.push_back(std::string(name) + " must have length " +
                               std::to_string(n) + ", got " +
                               std::to_string(v.size()));
    return false;
  }

 private:
  ValidationReport& report_;
};

}  // namespace

int TimeGrid::substeps() const {
  if (!(h > 0.0) || !(dt_obs > 0.0)) return 1;
  const double ratio = dt_obs / h;
  return std::max(1, static_cast<int>(std::lround(ratio)));
}

ErrorVector ErrorVector::zero(Eigen::Index n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
}

ErrorVector ErrorVector::from_stacked(const Eigen::VectorXd& stacked) {
  const Eigen::Index n = stacked.size() / 2;
  return {stacked.head(n), stacked.tail(n)};
}

Eigen::VectorXd ErrorVector::stacked() const {
  Eigen::VectorXd out(mean.size() + priv.size());
  out << mean, priv;
  return out;
}

bool ValidationReport::mentions(std::string_view fragment) const {
  for (const auto& p : problems) {
    if (p.find(fragment) != std::string::npos) return true;
  }
  return false;
}

ValidationReport validate(const SystemParams& p, const TimeGrid& grid,
                          const ErrorSpec& err, const InitSpec& init) {
  ValidationReport report;
  Checker check(report);

  const Eigen::Index n = p.A.rows();
  const Eigen::Index m = p.B.cols();
  check.require(n >= 1, "state dimension must be at least 1");
  check.require(m >= 1, "control dimension must be at least 1");
  if (n >= 1 && m >= 1) {
    check.shape(p.A, n, n, "A");
    check.shape(p.B, n, m, "B");
    check.shape(p.C, n, n, "C");
    check.shape(p.F, n, m, "F");
    check.shape(p.D, n, n, "D");
    check.shape(p.Q_I, n, n, "Q_I");
    check.shape(p.Q, n, n, "Q");
    check.shape(p.Qbar_I, n, n, "Qbar_I");
    check.shape(p.Qbar, n, n, "Qbar");
    check.shape(p.Gamma, n, n, "Gamma");
    check.shape(p.GammaBar, n, n, "GammaBar");
    check.length(p.s, n, "s");
    check.length(p.sbar, n, "sbar");
    check.length(p.eta, n, "eta");
    check.length(p.etaBar, n, "etaBar");
    if (check.shape(p.R, m, m, "R")) {
      check.require(is_symmetric(p.R), "R not symmetric");
      Eigen::LLT<Eigen::MatrixXd> llt(p.R);
      check.require(llt.info() == Eigen::Success && p.R.allFinite(),
                    "R not positive definite");
    }
  }
  check.require(std::isfinite(p.T) && p.T > 0.0, "T must be positive");

  check.require(grid.dt_obs > 0.0, "dt_obs must be positive");
  check.require(grid.n_obs >= 1, "N_t must be at least 1");
  check.require(grid.h > 0.0, "h must be positive");
  if (grid.dt_obs > 0.0 && grid.h > 0.0) {
    const double ratio = grid.dt_obs / grid.h;
    check.require(ratio >= 1.0 - 1e-9 &&
                      std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio,
                  "δt/h not a positive integer");
  }
  if (grid.dt_obs > 0.0 && grid.n_obs >= 1) {
    const double expected = grid.n_obs * grid.dt_obs;
    check.require(std::abs(p.T - expected) <= 1e-12 * std::max(1.0, expected),
                  "T ≠ N_t·δt");
  }
  {
    int prev = 0;
    bool ordered = true;
    for (int k : grid.mod_points) {
      if (k <= prev || k > grid.n_obs) ordered = false;
      prev = k;
    }
    check.require(ordered,
                  "modification points must be strictly increasing in (0, N_t]");
  }

  if (n >= 1) {
    check.length(err.mean_error, n, "mean_error");
    if (check.shape(err.private_variance, n, n, "private_variance")) {
      check.require(is_psd(err.private_variance),
                    "private_variance not symmetric positive semidefinite");
    }
    check.length(init.z0, n, "z0");
    if (check.shape(init.init_covariance, n, n, "init_covariance")) {
      check.require(is_psd(init.init_covariance),
                    "init_covariance not symmetric positive semidefinite");
    }
  }
  check.require(std::isfinite(err.bound) && err.bound > 0.0,
                "error bound L must be positive");
  if (err.mean_error.size() > 0 && err.mean_error.allFinite()) {
    check.require(err.mean_error.cwiseAbs().maxCoeff() <= err.bound,
                  "mean error outside Λ");
  }
  check.require(init.N >= 1, "population size N must be at least 1");
  return report;
}

ValidationReport validate(const Scenario& s) {
  return validate(s.params, s.grid, s.errors, s.init);
}

Scenario reference_scenario() {
  auto scalar = [](double v) { return Eigen::MatrixXd::Constant(1, 1, v); };
  auto vec = [](double v) { return Eigen::VectorXd::Constant(1, v); };

  Scenario sc;
  SystemParams& p = sc.params;
  p.A = scalar(1.0);
  p.B = scalar(0.5);
  p.C = scalar(-1.0);
  p.F = scalar(0.5);
  p.D = scalar(0.1);
  p.Q_I = scalar(0.5);
  p.Q = scalar(0.1);
  p.Qbar_I = scalar(0.5);
  p.Qbar = scalar(0.1);
  p.R = scalar(1.0);
  p.Gamma = scalar(1.0);
  p.GammaBar = scalar(1.0);
  p.s = vec(1.0);
  p.sbar = vec(1.0);
  p.eta = vec(0.1);
  p.etaBar = vec(0.1);
  p.T = 2.0;

  sc.grid.dt_obs = 0.02;
  sc.grid.n_obs = 100;
  sc.grid.h = 1e-3;

  sc.errors.mean_error = vec(10.0);
  sc.errors.private_variance = scalar(2.0);
  sc.errors.bound = 100.0;

  sc.init.z0 = vec(0.0);
  sc.init.init_covariance = scalar(0.1);
  sc.init.N = 100;
  sc.init.master_seed = 1;
  return sc;
}

}  // namespace ietmfc
