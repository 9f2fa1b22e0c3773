#include "ietmfc/grid_function.hpp"

#include <stdexcept>
#include <string>

namespace ietmfc {

GridFunction::GridFunction(double step, long first_node,
                           std::vector<Eigen::MatrixXd> nodes,
                           std::vector<Eigen::MatrixXd> midpoints)
    : step_(step),
      first_(first_node),
      nodes_(std::move(nodes)),
      midpoints_(std::move(midpoints)) {
  if (!midpoints_.empty() && midpoints_.size() + 1 != nodes_.size()) {
    throw std::invalid_argument("GridFunction: midpoint count must be nodes - 1");
  }
}

const Eigen::MatrixXd& GridFunction::at(long node) const {
  if (!covers(node)) {
    throw std::out_of_range("GridFunction: node " + std::to_string(node) +
                            " outside [" + std::to_string(first_) + ", " +
                            std::to_string(last_node()) + "]");
  }
  return nodes_[static_cast<std::size_t>(node - first_)];
}

const Eigen::MatrixXd& GridFunction::midpoint(long node) const {
  if (midpoints_.empty() || node < first_ || node >= last_node()) {
    throw std::out_of_range("GridFunction: no midpoint after node " +
                            std::to_string(node));
  }
  return midpoints_[static_cast<std::size_t>(node - first_)];
}

const Eigen::MatrixXd& GridFunction::at_half(long half_index) const {
  if (half_index % 2 == 0) return at(half_index / 2);
  return midpoint((half_index - 1) / 2);
}

}  // namespace ietmfc
