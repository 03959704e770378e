#pragma once

#include <stdexcept>
#include <string>

namespace fylab {

enum class ErrorKind {
  domain,
  accuracy,
  invalid_regime,
  singularity,
  resolution,
  extrapolation,
  numerical,
  calibration,
  no_bifurcation,
  continuation,
  positivity,
  certificate,
  config,
  io,
  invariant,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind decides
/// the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A truncated series that did not reach its tolerance.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double partial, double bound)
      : Error(ErrorKind::accuracy, what), partial_(partial), bound_(bound) {}
  double partial_value() const noexcept { return partial_; }
  double error_bound() const noexcept { return bound_; }

 private:
  double partial_;
  double bound_;
};

}  // namespace fylab
