#pragma once

#include <iosfwd>
#include <vector>

#include "gliocontrol/fields.hpp"
#include "gliocontrol/model.hpp"

namespace gliocontrol {

/// Jacobian of the reaction terms evaluated along a base trajectory, one
/// field per time level (steps + 1 entries each).
struct LinearizedCoefficients {
  FieldSeries d_rho1_F1;  ///< alpha - delta1 - beta v
  FieldSeries d_v_F1;     ///< -beta rho1
  FieldSeries d_rho1_F2;  ///< beta v
  FieldSeries d_rho2_F2;  ///< -delta2
  FieldSeries d_v_F2;     ///< beta rho1
  FieldSeries d_rho1_F3;  ///< -B v
  FieldSeries d_rho2_F3;  ///< b delta2
  FieldSeries d_v_F3;     ///< -B rho1 - delta_v
  TimeGrid time;
};

LinearizedCoefficients linearize_coeffs(const StateTrajectory& base, const ModelParams& p);

/// Directional derivative (X, Y, Z) of the control-to-state map.
struct TangentTrajectory {
  FieldSeries X;
  FieldSeries Y;
  FieldSeries Z;
};

/// Solves the linearized system with zero initial data. The time stepping
/// is the derivative of step_forward, so the result is the exact Jacobian
/// of the discrete control-to-state map applied to delta_u (one field per
/// time step).
TangentTrajectory solve_linearized(const LinearizedCoefficients& coeffs, const FieldSeries& delta_u,
                                   const ModelParams& p, const LinearSolveOptions& opts = {});

struct ConvergenceRow {
  double lambda = 0.0;
  double error = 0.0;
  double ratio = 0.0;  ///< error(previous lambda) / error(lambda); 0 on the first row
  bool at_floor = false;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  double tangent_norm = 0.0;
  /// Index of the first row whose ratio fell below kFirstOrderRatioMin, or -1.
  int floor_index = -1;
};

inline constexpr double kFirstOrderRatioMin = 1.6;
inline constexpr double kFirstOrderRatioMax = 2.4;

/// Sum over rho1, rho2, v of sup-over-time L2 norms.
double trajectory_distance(const FieldSeries& a1, const FieldSeries& a2, const FieldSeries& a3,
                           const FieldSeries& b1, const FieldSeries& b2, const FieldSeries& b3);

/// Compares (G(u* + lambda du) - G(u*)) / lambda with the tangent solution
/// for each lambda. Every probe control must be admissible; otherwise
/// ConfigError is thrown.
ConvergenceReport directional_derivative_check(const InitialData& init, const Control& u_star,
                                               const FieldSeries& delta_u, const std::vector<double>& lambdas,
                                               const TimeGrid& time, const ModelParams& p,
                                               const LinearSolveOptions& opts = {});

/// Columns: lambda, error, ratio, at_floor.
void write_csv(std::ostream& os, const ConvergenceReport& report);

}  // namespace gliocontrol
