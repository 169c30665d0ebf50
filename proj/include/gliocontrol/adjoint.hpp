#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "gliocontrol/fields.hpp"
#include "gliocontrol/model.hpp"
#include "gliocontrol/objective.hpp"
#include "gliocontrol/sensitivity.hpp"

namespace gliocontrol {

/// Backward multipliers (w, y, z) for (rho1, rho2, v), steps + 1 levels.
struct AdjointTrajectory {
  FieldSeries w;
  FieldSeries y;
  FieldSeries z;
  TimeGrid time;
};

/// Gradient of psi1 at the terminal state: (w(T), y(T), z(T)).
std::array<Field, 3> terminal_conditions(const StateTrajectory& base, const Objective& obj);

/// Transpose-Jacobian adjoint system
///   -w_t - lap w = dF1/drho1 w + dF2/drho1 y + dF3/drho1 z + dpsi2/drho1
///   -y_t - lap y =               dF2/drho2 y + dF3/drho2 z + dpsi2/drho2
///   -z_t - lap z = dF1/dv w    + dF2/dv y    + dF3/dv z    + dpsi2/dv
/// with homogeneous Neumann data, integrated backward from the terminal
/// gradient with the scalar kernel on reversed time. Each backward step
/// updates z, then y, then w, freezing coefficients at the known level
/// n + 1; the running-cost source uses level n, matching the left-endpoint
/// quadrature of the cost.
AdjointTrajectory solve_adjoint(const StateTrajectory& base, const Control& ctrl, const Objective& obj,
                                const ModelParams& p, const LinearSolveOptions& opts = {});

/// z_n + dpsi2/du at (state_n, u_n) for n < steps. TimeOnly controls get
/// the spatial mean of each slice, broadcast.
FieldSeries reduced_gradient(const FieldSeries& adjoint_z, const StateTrajectory& base, const Control& ctrl,
                             const Objective& obj);

struct DualityReport {
  double lhs = 0.0;  ///< <grad psi1, (X,Y,Z)(T)> + int <grad psi2, (X,Y,Z)>
  double rhs = 0.0;  ///< int int delta_u z
  double residual = 0.0;
};

inline constexpr double kRelativeEps = 1e-30;

/// |lhs - rhs| / (|lhs| + |rhs| + eps). Tangent and adjoint must share the
/// base trajectory's grid and time levels.
DualityReport duality_check(const TangentTrajectory& tangent, const AdjointTrajectory& adjoint,
                            const FieldSeries& delta_u, const Objective& obj, const StateTrajectory& base,
                            const Control& ctrl);

/// Space-time inner product sum_n dt <a_n, b_n> over the first `steps` slices.
double spacetime_inner(const FieldSeries& a, const FieldSeries& b, double dt, int steps);

struct GradientCheckReport {
  std::vector<double> finite_difference;  ///< central differences of f, one per direction
  std::vector<double> adjoint;            ///< <reduced gradient, direction>
  double cosine = 0.0;
  double relative_error = 0.0;  ///< ||fd - adjoint|| / ||fd||
};

/// Compares the adjoint gradient of f(u) = J(G(u), u) with central
/// differences (f(u + eps d) - f(u - eps d)) / (2 eps) along each direction.
/// Probe controls must be admissible.
GradientCheckReport gradient_check(const InitialData& init, const Control& u_star, const Objective& obj,
                                   const ModelParams& p, const TimeGrid& time,
                                   const std::vector<FieldSeries>& directions, double eps,
                                   const LinearSolveOptions& opts = {});

/// Columns: direction, finite_difference, adjoint, relative_error.
void write_csv(std::ostream& os, const GradientCheckReport& report);

}  // namespace gliocontrol
