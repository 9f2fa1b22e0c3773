#pragma once

#include <stdexcept>
#include <string>

namespace ietmfc {

/// Base class for failures of the numerical pipeline (CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An ODE solution left the finite range, e.g. a Riccati escape before T.
class NonFiniteBlowup : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A transition window with zero length was requested.
class DegenerateWindow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A transition covariance is not positive definite.
class SingularCovariance : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ietmfc
