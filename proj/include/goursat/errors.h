#pragma once

#include <stdexcept>
#include <string>

namespace goursat {

// Invalid user input (bad spec strings, non-positive times, malformed files).
// Argument errors reuse std::invalid_argument so callers can catch either.
using ConfigError = std::invalid_argument;

// Base for every failure caused by floating-point limits rather than bad input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string& what, double time, double condition)
      : NumericalError(what), time_(time), condition_(condition) {}
  double time() const noexcept { return time_; }
  double condition() const noexcept { return condition_; }

 private:
  double time_;
  double condition_;
};

class QuadratureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergedError : public NumericalError {
 public:
  NonConvergedError(const std::string& what, double estimate)
      : NumericalError(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

class TruncationError : public NumericalError {
 public:
  TruncationError(const std::string& what, double bound)
      : NumericalError(what), bound_(bound) {}
  double bound() const noexcept { return bound_; }

 private:
  double bound_;
};

}  // namespace goursat
