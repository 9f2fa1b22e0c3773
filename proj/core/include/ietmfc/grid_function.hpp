#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace ietmfc {

/// A matrix-valued function sampled on consecutive grid nodes.
///
/// Node k lives at time k * step(). Functions produced by the ODE integrator
/// also carry the value at every interval midpoint, so that later RK4 solves
/// can use them as coefficients without leaving the lattice of half steps.
/// There is no interpolation: asking for an uncovered node throws.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(double step, long first_node, std::vector<Eigen::MatrixXd> nodes,
               std::vector<Eigen::MatrixXd> midpoints = {});

  double step() const { return step_; }
  long first_node() const { return first_; }
  long last_node() const { return first_ + static_cast<long>(nodes_.size()) - 1; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  bool covers(long node) const { return node >= first_ && node <= last_node(); }
  bool has_midpoints() const { return !midpoints_.empty(); }
  double time(long node) const { return static_cast<double>(node) * step_; }

  const Eigen::MatrixXd& at(long node) const;
  /// Value at (node + 1/2) * step().
  const Eigen::MatrixXd& midpoint(long node) const;
  /// Lattice of half steps: even index 2k is node k, odd 2k+1 its midpoint.
  const Eigen::MatrixXd& at_half(long half_index) const;

  std::span<const Eigen::MatrixXd> nodes() const { return nodes_; }

 private:
  double step_ = 0.0;
  long first_ = 0;
  std::vector<Eigen::MatrixXd> nodes_;
  std::vector<Eigen::MatrixXd> midpoints_;
};

}  // namespace ietmfc
