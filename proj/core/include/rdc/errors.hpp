#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace rdc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wavelength outside the covered range of a tabulated material.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (nk tables, CSV data). Carries a 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Configuration or input that is well formed but not acceptable.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what, std::size_t line = 0)
      : Error(format(field, what, line)), field_(std::move(field)), line_(line) {}
  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, const std::string& what, std::size_t line) {
    std::string out = field.empty() ? what : field + ": " + what;
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    return out;
  }
  std::string field_;
  std::size_t line_;
};

/// A physically meaningful request the solver does not model (e.g. emitter in a lossy layer).
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

/// Quadrature failed to reach the requested accuracy.
class NumericalAccuracyError : public Error {
 public:
  NumericalAccuracyError(const std::string& what, double achieved_error)
      : Error(what), achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// Least-squares fit failed (non-convergence or degenerate data).
class FitError : public Error {
 public:
  FitError(const std::string& what, double final_residual)
      : Error(what), final_residual_(final_residual) {}
  double final_residual() const noexcept { return final_residual_; }

 private:
  double final_residual_;
};

/// Optimum refinement refused because the grid maximum sits on a sweep endpoint.
class BoundaryOptimum : public Error {
 public:
  explicit BoundaryOptimum(double value)
      : Error("optimum lies on the sweep boundary at " + std::to_string(value)), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

}  // namespace rdc
