#pragma once

#include <stdexcept>
#include <string>

namespace gliocontrol {

/// Invalid input data, parameters or configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear solve failed to reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// A fixed-point iteration did not converge.
class IterationError : public std::runtime_error {
 public:
  IterationError(const std::string& what, double last_increment, int iterations)
      : std::runtime_error(what), last_increment_(last_increment), iterations_(iterations) {}

  double last_increment() const { return last_increment_; }
  int iterations() const { return iterations_; }

 private:
  double last_increment_;
  int iterations_;
};

}  // namespace gliocontrol
