#pragma once

#include <stdexcept>
#include <string>

namespace recurweight {

// Base for every numerical failure raised by the fitting code. Callers that
// run many replicates catch this type, count the failure and move on.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Logistic regression coefficients diverge (complete or quasi-complete
// separation, constant response).
class SeparationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Newton / IRLS did not meet its convergence criterion within the cap.
class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Information matrix is not positive definite.
class SingularMatrixError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Cox partial likelihood increases without bound (no contrast between arms).
class MonotoneLikelihoodError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Bisection bracket does not straddle the target.
class BracketError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Bad command line; the message is meant for the user.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace recurweight
