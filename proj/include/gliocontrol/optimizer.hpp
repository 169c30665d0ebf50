#pragma once

#include <iosfwd>
#include <vector>

#include "gliocontrol/adjoint.hpp"
#include "gliocontrol/fields.hpp"
#include "gliocontrol/model.hpp"
#include "gliocontrol/objective.hpp"

namespace gliocontrol {

struct OptimizerOptions {
  int max_outer_iterations = 200;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double initial_step = 1.0;
  double stationarity_tol = 1e-6;
  int max_backtracks = 40;

  void validate() const;
  bool operator==(const OptimizerOptions&) const = default;
};

struct IterationRecord {
  int iteration = 0;
  double f = 0.0;
  double residual = 0.0;
  double step = 0.0;  ///< accepted step, 0 on the final record
  int backtracks = 0;
};

struct OptimizationHistory {
  std::vector<IterationRecord> records;
};

/// Projection onto the admissible set: pointwise clip to [0, cap]; in
/// TimeOnly mode each slice is first replaced by its spatial mean.
Control project(const FieldSeries& u_raw, double cap, ControlMode mode);

/// || u - project(u - grad) ||_{L2(space-time)}, unit trial step.
double stationarity_residual(const Control& u, const FieldSeries& grad, double dt);

struct OcpResult {
  Control control;
  StateTrajectory state;
  AdjointTrajectory adjoint;
  FieldSeries gradient;
  OptimizationHistory history;
  bool converged = false;
  bool stalled = false;
};

/// Projected gradient descent with backtracking on
///   f(u+) <= f(u) - (c / s) ||u+ - u||^2,   u+ = project(u - s grad).
/// Stops on the stationarity tolerance or the iteration cap; a failed line
/// search ends the run with `stalled` set and the best iterate returned.
OcpResult solve_ocp(const InitialData& init, const ModelParams& p, const TimeGrid& time, const Objective& obj,
                    const OptimizerOptions& opts, const Control& u_init, const LinearSolveOptions& lin = {});

struct KktReport {
  double violation_fraction = 0.0;
  std::size_t violations = 0;
  std::size_t exempt = 0;  ///< cells with |grad| <= tol
  std::size_t total = 0;
};

/// Sign structure of the variational inequality: grad > tol requires u == 0,
/// grad < -tol requires u == cap.
KktReport kkt_sign_report(const Control& u, const FieldSeries& grad, double tol);

/// Columns: iteration, f, residual, step, backtracks.
void write_csv(std::ostream& os, const OptimizationHistory& history);

}  // namespace gliocontrol
