#include "ietmfc/estimation.hpp"

#include "ietmfc/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace ietmfc {
namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

constexpr double kMaxCondition = 1e12;

void check_sizes(std::span<const TransitionMoments> moments,
                 std::span<const Vector> observations) {
  if (moments.empty()) {
    throw std::invalid_argument("likelihood needs at least one window");
  }
  if (moments.size() != observations.size()) {
    throw std::invalid_argument("one observation per window expected");
  }
}

Eigen::LLT<Matrix> factor(const TransitionMoments& tm) {
  Eigen::LLT<Matrix> llt(tm.Sigma);
  if (llt.info() != Eigen::Success || tm.Sigma.size() == 0 ||
      llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 0.0) {
    throw SingularCovariance("transition covariance over nodes [" +
                             std::to_string(tm.from_node) + ", " +
                             std::to_string(tm.to_node) +
                             "] is not positive definite");
  }
  return llt;
}

std::optional<double> try_log_likelihood(std::span<const TransitionMoments> moments,
                                         std::span<const Vector> observations,
                                         const ErrorVector& E) {
  try {
    return log_likelihood(moments, observations, E);
  } catch (const SingularCovariance&) {
    return std::nullopt;
  }
}

}  // namespace

TransitionMoments transition_moments(const FlowSet& fs, const KernelSet& ks,
                                     const ControlLaw& law, const MFPrediction& pred,
                                     long s, long t, const Vector& x) {
  if (t == s) {
    throw DegenerateWindow("transition window [" + std::to_string(s) + ", " +
                           std::to_string(t) + "] has zero length");
  }
  if (t < s) throw std::invalid_argument("transition window must have s < t");
  if (s < ks.anchor || s < law.valid_from || t > law.valid_to ||
      s < pred.z.first_node()) {
    throw std::invalid_argument("transition window outside the law's validity");
  }

  const SystemParams& p = fs.params;
  const double h = fs.step();
  const Matrix DDt = p.D * p.D.transpose();
  const Eigen::Index n = p.state_dim();

  Vector ic = Vector::Zero(n);
  Matrix iM = Matrix::Zero(n, 2 * n);
  Matrix iS = Matrix::Zero(n, n);
  for (long k = s; k <= t; ++k) {
    const double w = (k == s || k == t) ? 0.5 * h : h;
    const Matrix& psi = fs.Phix_inv.at(k);
    const Matrix coupling = p.C - fs.m.FRinv_Bt * fs.P1.at(k);
    const Vector drift = coupling * pred.z.at(k) - fs.m.SF * law.g.at(k);
    ic.noalias() += w * (psi * drift);
    iM.noalias() += w * (psi * ks.K(k));
    iS.noalias() += w * (psi * DDt * psi.transpose());
  }

  const Matrix& phi_t = fs.Phix.at(t);
  TransitionMoments tm;
  tm.from_node = s;
  tm.to_node = t;
  tm.c = phi_t * (fs.Phix_inv.at(s) * x + ic);
  tm.M = phi_t * iM;
  const Matrix sigma = phi_t * iS * phi_t.transpose();
  tm.Sigma = 0.5 * (sigma + sigma.transpose());
  return tm;
}

std::vector<TransitionMoments> consecutive_windows(
    const FlowSet& fs, const KernelSet& ks, const ControlLaw& law,
    const MFPrediction& pred, std::span<const Vector> samples, long first_node,
    long stride) {
  std::vector<TransitionMoments> out;
  if (samples.size() < 2) return out;
  out.reserve(samples.size() - 1);
  for (std::size_t j = 0; j + 1 < samples.size(); ++j) {
    const long s = first_node + static_cast<long>(j) * stride;
    out.push_back(transition_moments(fs, ks, law, pred, s, s + stride, samples[j]));
  }
  return out;
}

double log_likelihood(std::span<const TransitionMoments> moments,
                      std::span<const Vector> observations, const ErrorVector& E) {
  check_sizes(moments, observations);
  const Vector e = E.stacked();
  double total = 0.0;
  for (std::size_t j = 0; j < moments.size(); ++j) {
    const TransitionMoments& tm = moments[j];
    const Eigen::LLT<Matrix> llt = factor(tm);
    const Vector r = observations[j] - tm.c - tm.M * e;
    const Vector whitened = llt.matrixL().solve(r);
    const double logdet =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double n = static_cast<double>(r.size());
    total += -0.5 * (n * std::log(2.0 * std::numbers::pi) + logdet +
                     whitened.squaredNorm());
  }
  return total;
}

Eigen::MatrixXd information_matrix(std::span<const TransitionMoments> moments) {
  if (moments.empty()) throw std::invalid_argument("information needs a window");
  const Eigen::Index dim = moments.front().M.cols();
  Matrix info = Matrix::Zero(dim, dim);
  for (const auto& tm : moments) {
    const Eigen::LLT<Matrix> llt = factor(tm);
    info.noalias() += tm.M.transpose() * llt.solve(tm.M);
  }
  return 0.5 * (info + info.transpose());
}

EstimationResult mle_solve(std::span<const TransitionMoments> moments,
                           std::span<const Vector> observations, double bound,
                           Weighting weighting) {
  check_sizes(moments, observations);
  const Eigen::Index dim = moments.front().M.cols();
  Matrix info = Matrix::Zero(dim, dim);
  Vector rhs = Vector::Zero(dim);
  for (std::size_t j = 0; j < moments.size(); ++j) {
    const TransitionMoments& tm = moments[j];
    const Vector r = observations[j] - tm.c;
    if (weighting == Weighting::inverse_covariance) {
      const Eigen::LLT<Matrix> llt = factor(tm);
      const Matrix WM = llt.solve(tm.M);
      info.noalias() += tm.M.transpose() * WM;
      rhs.noalias() += WM.transpose() * r;
    } else {
      info.noalias() += tm.M.transpose() * tm.M;
      rhs.noalias() += tm.M.transpose() * r;
    }
  }
  info = 0.5 * (info + info.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(info);
  const Vector& lambda = eig.eigenvalues();
  const double lmax = lambda.maxCoeff();
  const double lmin = lambda.minCoeff();

  EstimationResult res;
  res.information = info;
  res.condition_number =
      (lmin > 0.0) ? lmax / lmin : std::numeric_limits<double>::infinity();
  res.identifiable = lmax > 0.0 && res.condition_number < kMaxCondition;

  Vector e;
  if (res.identifiable) {
    e = info.ldlt().solve(rhs);
  } else {
    // Minimum-norm solution on the numerically non-null eigenspace.
    const double cutoff = std::max(lmax, 0.0) * 1e-12;
    Vector coeff = eig.eigenvectors().transpose() * rhs;
    for (Eigen::Index i = 0; i < coeff.size(); ++i) {
      coeff[i] = (lambda[i] > cutoff && lambda[i] > 0.0) ? coeff[i] / lambda[i] : 0.0;
    }
    e = eig.eigenvectors() * coeff;
  }

  for (Eigen::Index i = 0; i < e.size(); ++i) {
    if (e[i] > bound) {
      e[i] = bound;
      res.clamped = true;
    } else if (e[i] < -bound) {
      e[i] = -bound;
      res.clamped = true;
    }
  }
  res.E_hat = ErrorVector::from_stacked(e);
  res.loglik = try_log_likelihood(moments, observations, res.E_hat)
                   .value_or(std::numeric_limits<double>::quiet_NaN());
  return res;
}

double cramer_rao_floor(const Eigen::MatrixXd& information) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(information, Eigen::EigenvaluesOnly);
  const Vector& lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(lambda.cwiseInverse().sum());
}

Eigen::VectorXd estimate_state(const KernelSet& ks, const MFPrediction& pred,
                               const ErrorVector& E_hat, long node) {
  return pred.z.at(node) + ks.Mz.at(node) * E_hat.mean -
         ks.Phi1_rel.at(node) * E_hat.priv;
}

}  // namespace ietmfc
