#pragma once

#include <vector>

#include "gliocontrol/fields.hpp"

namespace gliocontrol {

struct LinearSolveOptions {
  double tolerance = 1e-10;  ///< relative residual
  int max_iterations = 0;    ///< 0 means 10 x cell count

  bool operator==(const LinearSolveOptions&) const = default;
};

struct CgStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves (shift - dt * laplacian) x = rhs for a pointwise shift >= 1 by
/// Jacobi-preconditioned conjugate gradients. The initial guess is
/// rhs / shift. Throws SolverError on non-convergence.
Field solve_shifted_diffusion(const Field& shift, double dt, const Field& rhs,
                              const LinearSolveOptions& opts = {}, CgStats* stats = nullptr);

/// One implicit Euler step for  u_t - lap(u) + c u = f  with the reaction
/// split by sign: the nonnegative part of c is implicit, the negative part
/// explicit,
///   (I - dt lap + dt c+) u_next = u + dt (f - c- u).
/// Requires dt * ||c-||_inf <= 1 so that nonnegative data stay nonnegative.
Field step_scalar(const Field& u, const Field& c, const Field& f, double dt,
                  const LinearSolveOptions& opts = {});

/// Scalar linear parabolic problem with homogeneous Neumann data.
/// `reaction` and `source` hold one field per time step (left endpoint
/// sampling); entries beyond `time.steps()` are ignored.
struct ScalarParabolicProblem {
  Field initial;
  FieldSeries reaction;
  FieldSeries source;
  TimeGrid time;
};

/// Returns steps + 1 fields starting at the initial datum.
FieldSeries solve_scalar(const ScalarParabolicProblem& problem, const LinearSolveOptions& opts = {});

/// L-infinity growth envelope for nonnegative data:
///   (g + f/c) e^{c t} - f/c   if c > 0,   g + f t   if c == 0.
double max_principle_bound(double g_sup, double f_sup, double c_inf_norm, double t);

struct StabilityReport {
  std::vector<double> times;
  std::vector<double> lhs;  ///< ||u1(t) - u2(t)||^2
  std::vector<double> rhs;  ///< e^{2 c_o t} int_0^t ||f1 - f2||^2
  double worst_ratio = 0.0;  ///< max lhs / rhs over steps with rhs > 0
  bool passed = true;
};

/// Compares two scalar solves sharing initial datum and reaction against
/// the L2 stability estimate, with c_o = max(1, c_norm). The check passes
/// when lhs <= slack * rhs at every step (lhs == 0 is required where rhs == 0).
StabilityReport stability_gap(const FieldSeries& traj1, const FieldSeries& traj2, const FieldSeries& f1,
                              const FieldSeries& f2, double c_norm, const TimeGrid& time1,
                              const TimeGrid& time2, double slack = 1.0);

}  // namespace gliocontrol
