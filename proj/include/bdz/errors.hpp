#pragma once

/// @file errors.hpp
/// Exception hierarchy. Every domain failure derives from bdz::Error so the
/// CLI can map each kind to its own exit code.

#include <stdexcept>
#include <string>

namespace bdz {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Chain rows do not sum to one, or carry negative entries.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A continued fraction failed to converge within the iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A free parameter lies outside its admissible range.
class BoundError : public Error {
 public:
  using Error::Error;
};

/// A factor entry left [0, 1] beyond tolerance.
class StochasticityError : public Error {
 public:
  StochasticityError(const std::string& what, long index)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
  long index() const noexcept { return index_; }

 private:
  long index_;
};

/// Divisor or determinant below threshold.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// y0 = 0 (boundary H + H' = 1) or b0 = 0.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// d_{+1}, d_{-1} violate the AR compatibility identities.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

/// Negative moment requested while 0 lies in the support.
class UndefinedMomentError : public Error {
 public:
  using Error::Error;
};

/// Stieltjes data inconsistent with a positive measure.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or command-line configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bdz
