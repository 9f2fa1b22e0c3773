#pragma once

#include "ietmfc/meanfield.hpp"
#include "ietmfc/model.hpp"
#include "ietmfc/odeflow.hpp"
#include "ietmfc/propagation.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace ietmfc {

/// Gaussian law of x(t) given x(s) = x under the closed-loop private dynamics:
/// mean c + M E, covariance Sigma, with E the stacked error.
struct TransitionMoments {
  Eigen::VectorXd c;      // n
  Eigen::MatrixXd M;      // n x 2n
  Eigen::MatrixXd Sigma;  // n x n
  long from_node = 0;
  long to_node = 0;

  Eigen::VectorXd mean(const ErrorVector& E) const { return c + M * E.stacked(); }
};

struct EstimationResult {
  ErrorVector E_hat;
  Eigen::MatrixXd information;  // sum_j M_j^T W_j M_j
  double loglik = 0.0;
  double condition_number = 0.0;
  bool identifiable = false;
  bool clamped = false;
};

enum class Weighting { inverse_covariance, identity };

/// Moments over [s, t] for an agent following `law` with prediction `prediction`,
/// all integrals by trapezoidal quadrature on the grid.
/// Throws DegenerateWindow if t == s.
TransitionMoments transition_moments(const FlowSet& flows, const KernelSet& kernels,
                                     const ControlLaw& law,
                                     const MFPrediction& prediction, long s_node,
                                     long t_node, const Eigen::VectorXd& x);

/// Moments of consecutive windows between samples taken every `stride` nodes,
/// the first sample at `first_node`: window j runs from sample j to j + 1.
std::vector<TransitionMoments> consecutive_windows(
    const FlowSet& flows, const KernelSet& kernels, const ControlLaw& law,
    const MFPrediction& prediction, std::span<const Eigen::VectorXd> samples,
    long first_node, long stride);

/// Sum of Gaussian log-densities of each window's observed endpoint.
/// Throws SingularCovariance if a Sigma is not positive definite.
double log_likelihood(std::span<const TransitionMoments> moments,
                      std::span<const Eigen::VectorXd> observations,
                      const ErrorVector& E);

/// Closed-form maximiser of the (concave quadratic) log-likelihood, clamped
/// coordinatewise to [-bound, bound]. When the information matrix is singular
/// or its condition number reaches 1e12 the minimum-norm solution is returned
/// with identifiable = false.
EstimationResult mle_solve(std::span<const TransitionMoments> moments,
                           std::span<const Eigen::VectorXd> observations,
                           double bound,
                           Weighting weighting = Weighting::inverse_covariance);

Eigen::MatrixXd information_matrix(std::span<const TransitionMoments> moments);

/// sqrt(trace(I^{-1})): root-mean-square error of an efficient estimator.
double cramer_rao_floor(const Eigen::MatrixXd& information);

/// Error-corrected mean-field state at `node`:
/// z_pred(t) + Mz(t) Ebar_hat - Phi1(t) Phi1^{-1}(anchor) E_hat_i.
Eigen::VectorXd estimate_state(const KernelSet& kernels, const MFPrediction& prediction,
                               const ErrorVector& E_hat, long node);

}  // namespace ietmfc
