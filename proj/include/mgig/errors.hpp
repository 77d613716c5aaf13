#pragma once

#include <stdexcept>

namespace mgig {

// Base class for every failure this library reports.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The caller handed us something that violates a documented precondition.
struct ValidationError : Error {
  using Error::Error;
};

struct DimensionMismatch : ValidationError {
  using ValidationError::ValidationError;
};
struct InvalidDof : ValidationError {
  using ValidationError::ValidationError;
};
struct DuplicateEntry : ValidationError {
  using ValidationError::ValidationError;
};
struct ModeNotInterior : ValidationError {
  using ValidationError::ValidationError;
};

// A computation on valid inputs failed numerically.
struct NumericalError : Error {
  using Error::Error;
};

struct NotPositiveDefinite : NumericalError {
  using NumericalError::NumericalError;
};
struct ConvergenceFailure : NumericalError {
  using NumericalError::NumericalError;
};
struct NoStabilizingSolution : NumericalError {
  using NumericalError::NumericalError;
};
struct SingularX1 : NumericalError {
  using NumericalError::NumericalError;
};
struct AllWeightsDegenerate : NumericalError {
  using NumericalError::NumericalError;
};
struct DegenerateCovariance : NumericalError {
  using NumericalError::NumericalError;
};
struct SingularObservedBlock : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace mgig
