#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace degentrace {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched dimensions, orders or indices between values.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain where an operation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A symbol violates one of the standing hypotheses on the local model.
class HypothesisError : public Error {
 public:
  HypothesisError(std::string hypothesis, const std::string& what,
                  std::vector<double> direction = {})
      : Error(hypothesis + ": " + what),
        hypothesis_(std::move(hypothesis)),
        direction_(std::move(direction)) {}

  const std::string& hypothesis() const noexcept { return hypothesis_; }
  // Offending sphere direction, empty when not applicable.
  const std::vector<double>& direction() const noexcept { return direction_; }

 private:
  std::string hypothesis_;
  std::vector<double> direction_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Sampled data too coarse for the requested transform.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// An internal invariant failed. Never expected in correct use.
class InternalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace degentrace
