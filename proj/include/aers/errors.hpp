#pragma once

#include <stdexcept>
#include <string>

namespace aers {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: configuration keys, units, out-of-domain parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Hilbert-space truncation exceeds the configured dimension cap.
class SizingError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Operand shapes that do not match (operator vs. state, etc.).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Numerical failure: degenerate steady state, non-converged exponential,
/// insufficiently decayed correlator, ...
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegenerateSteadyStateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TruncationError : public NumericalError {
 public:
  TruncationError(const std::string& what, double required_tau_max)
      : NumericalError(what), required_tau_max_(required_tau_max) {}
  double required_tau_max() const { return required_tau_max_; }

 private:
  double required_tau_max_;
};

/// A physical-validity assumption is violated (e.g. Markov condition);
/// only raised when the caller asked for strict checking.
class ModelValidityError : public Error {
 public:
  using Error::Error;
};

}  // namespace aers
