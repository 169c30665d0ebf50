#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "gliocontrol/fields.hpp"
#include "gliocontrol/parabolic.hpp"

namespace gliocontrol {

/// Rate constants of the tumor/virus system and the control cap U.
///
///   rho1_t = lap rho1 + (alpha - delta1) rho1 - beta rho1 v
///   rho2_t = lap rho2 + beta rho1 v - delta2 rho2
///   v_t    = lap v + b delta2 rho2 - B rho1 v - delta_v v + u
///
/// rho1: uninfected tumor cells, rho2: infected tumor cells, v: free virus,
/// u: virus infusion rate, 0 <= u <= U.
struct ModelParams {
  double alpha = 1.0;
  double beta = 1.0;
  double delta1 = 1.0;
  double delta2 = 1.0;
  double delta_v = 1.0;
  double b = 1.0;
  double B = 1.0;
  double u_cap = 1.0;

  /// Throws ConfigError naming the first non-positive constant.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

struct State {
  Field rho1;
  Field rho2;
  Field v;
};

struct InitialData {
  Field rho1;
  Field rho2;
  Field v;

  /// All three on one grid, finite and nonnegative.
  void validate() const;
  State state() const { return State{rho1, rho2, v}; }
};

enum class ControlMode { SpaceTime, TimeOnly };

/// Piecewise constant in time: slice n acts on [t_n, t_{n+1}). TimeOnly
/// controls are stored broadcast, one spatially constant field per slice.
class Control {
 public:
  Control() = default;
  Control(ControlMode mode, double cap, FieldSeries slices);

  static Control constant(const Grid& grid, int steps, double value, double cap,
                          ControlMode mode = ControlMode::SpaceTime);
  static Control time_only(const Grid& grid, std::span<const double> values, double cap);

  ControlMode mode() const { return mode_; }
  double cap() const { return cap_; }
  int steps() const { return static_cast<int>(slices_.size()); }
  const Field& slice(int n) const { return slices_[n]; }
  const FieldSeries& slices() const { return slices_; }
  const Grid& grid() const { return slices_.front().grid(); }

  /// Throws ConfigError unless 0 <= u <= cap everywhere (and slices are
  /// spatially constant in TimeOnly mode).
  void validate() const;
  bool is_admissible() const;

  bool operator==(const Control&) const = default;

 private:
  ControlMode mode_ = ControlMode::SpaceTime;
  double cap_ = 1.0;
  FieldSeries slices_;
};

/// steps + 1 states on a shared grid and time grid.
struct StateTrajectory {
  FieldSeries rho1;
  FieldSeries rho2;
  FieldSeries v;
  TimeGrid time;

  int steps() const { return time.steps(); }
  const Grid& grid() const { return rho1.front().grid(); }
  State at(int n) const { return State{rho1[n], rho2[n], v[n]}; }
};

/// Pointwise reaction terms; the infusion u enters the third component.
std::array<double, 3> reaction_rates(double rho1, double rho2, double v, double u, const ModelParams& p);

/// Largest admissible dt * (alpha + delta2 + delta_v + beta ||v||_inf + B ||rho1||_inf).
inline constexpr double kMaxExplicitRate = 0.5;

/// Throws ConfigError naming the violated bound.
void validate_time_step(const State& s, double dt, const ModelParams& p);

/// One sequential IMEX step. Each unknown is advanced by the scalar
/// kernel with coefficients frozen at the newest available values:
///   rho1: implicit loss delta1 + beta v_n, explicit gain alpha rho1_n
///   rho2: implicit loss delta2, explicit gain beta rho1_{n+1} v_n
///   v:    implicit loss delta_v + B rho1_{n+1}, explicit gain
///         b delta2 rho2_{n+1} + u_n
/// The result is nonnegative whenever the inputs are.
State step_forward(const State& s, const Field& u, double dt, const ModelParams& p,
                   const LinearSolveOptions& opts = {});

StateTrajectory solve_forward(const InitialData& init, const Control& ctrl, const TimeGrid& time,
                              const ModelParams& p, const LinearSolveOptions& opts = {});

struct PicardResult {
  StateTrajectory trajectory;
  int iterations = 0;
  double last_increment = 0.0;
  std::vector<double> increments;
};

/// Fixed-point iteration of the decoupled map: each sweep solves the three
/// scalar problems over the whole horizon with the coupling frozen at the
/// previous iterate. The discrete fixed point coincides with solve_forward.
/// Stops when the increment (sum of sup-over-time L2 differences) drops
/// below `tol`; throws IterationError after max_iter sweeps or on blow-up.
PicardResult solve_forward_picard(const InitialData& init, const Control& ctrl, const TimeGrid& time,
                                  const ModelParams& p, int max_iter, double tol,
                                  const LinearSolveOptions& opts = {});

struct BoundCheck {
  std::string name;
  double bound = 0.0;
  double max_value = 0.0;
  double min_value = 0.0;
  double slack = 0.0;  ///< bound - max_value
  bool passed = true;
  int worst_step = -1;  ///< location of the worst violation, -1 if none
  std::size_t worst_cell = 0;
};

struct BoundsReport {
  std::array<BoundCheck, 3> checks;
  bool passed = true;
};

inline constexpr double kBoundsRelTol = 1e-6;
inline constexpr double kPositivityTol = 1e-12;

/// Growth envelopes for nonnegative data:
///   rho1 <= ||rho1_0|| e^{|alpha - delta1| T}
///   rho2 <= (||rho1_0|| + ||rho2_0||) e^{alpha T}
///   v    <= ||v_0|| + (b delta2 (||rho1_0|| + ||rho2_0||) e^{alpha T} + U) T
/// together with positivity down to -kPositivityTol.
BoundsReport verify_bounds(const StateTrajectory& traj, const InitialData& init, const ModelParams& p,
                           double u_cap);

/// Envelope values in the order rho1, rho2, v.
std::array<double, 3> growth_envelopes(const InitialData& init, const ModelParams& p, double u_cap, double t_final);

/// Columns: t, int rho1, int rho2, int v, then min and max of each unknown.
void write_timeseries_csv(std::ostream& os, const StateTrajectory& traj);

/// Writes `<dir>/<unknown>_step<NNNNNN>` snapshots every `every` steps
/// (always including the first and last level; every == 0 keeps only those).
void write_trajectory_snapshots(const std::string& dir, const StateTrajectory& traj, int every);

}  // namespace gliocontrol
