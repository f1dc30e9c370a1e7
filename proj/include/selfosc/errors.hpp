#pragma once

#include <stdexcept>
#include <string>

namespace selfosc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or out-of-range request (bad parameters, grid mismatch,
/// insufficient data).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Too few oscillations or samples for an observable estimate.
class InsufficientDataError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Base class for failures of the numerical machinery itself.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A characteristic root with non-negative real part.
class InstabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Two characteristic roots closer than the separation threshold.
class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The friction kernel denominator vanished at time `time`.
class SingularKernelError : public NumericalError {
 public:
  SingularKernelError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Quadrature failed to reach its tolerance.
class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double achieved_error)
      : NumericalError(what), achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// NaN/Inf or blow-up during time integration.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Configuration file problems. `line` is 0 when not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace selfosc
