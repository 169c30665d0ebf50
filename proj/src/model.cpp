#include "gliocontrol/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "gliocontrol/errors.hpp"

namespace gliocontrol {

void ModelParams::validate() const {
  const std::pair<const char*, double> entries[] = {
      {"alpha", alpha}, {"beta", beta}, {"delta1", delta1}, {"delta2", delta2},
      {"delta_v", delta_v}, {"b", b}, {"B", B}, {"u_cap", u_cap},
  };
  for (const auto& [name, value] : entries) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ConfigError(std::string("params: ") + name + " = " + std::to_string(value) +
                        " violates the requirement that model rates are fixed positive constants");
    }
  }
}

void InitialData::validate() const {
  require_same_grid(rho1.grid(), rho2.grid(), "initial data");
  require_same_grid(rho1.grid(), v.grid(), "initial data");
  const std::pair<const char*, const Field*> entries[] = {{"rho1", &rho1}, {"rho2", &rho2}, {"v", &v}};
  for (const auto& [name, f] : entries) {
    if (f->size() != f->grid().size()) throw ConfigError(std::string("initial data: ") + name + " is empty");
    if (!f->all_finite()) throw ConfigError(std::string("initial data: ") + name + " has non-finite values");
    if (f->min() < 0.0) throw ConfigError(std::string("initial data: ") + name + " must be nonnegative");
  }
}

Control::Control(ControlMode mode, double cap, FieldSeries slices)
    : mode_(mode), cap_(cap), slices_(std::move(slices)) {
  if (!(cap_ > 0.0)) throw ConfigError("control: cap must be positive");
  if (slices_.empty()) throw ConfigError("control: needs at least one time slice");
  for (const Field& f : slices_) require_same_grid(slices_.front().grid(), f.grid(), "control");
}

Control Control::constant(const Grid& grid, int steps, double value, double cap, ControlMode mode) {
  return Control(mode, cap, FieldSeries(static_cast<std::size_t>(steps), Field(grid, value)));
}

Control Control::time_only(const Grid& grid, std::span<const double> values, double cap) {
  FieldSeries slices;
  slices.reserve(values.size());
  for (double x : values) slices.emplace_back(grid, x);
  return Control(ControlMode::TimeOnly, cap, std::move(slices));
}

bool Control::is_admissible() const {
  for (const Field& f : slices_) {
    if (!f.all_finite() || f.min() < 0.0 || f.max() > cap_) return false;
    if (mode_ == ControlMode::TimeOnly && f.min() != f.max()) return false;
  }
  return true;
}

void Control::validate() const {
  for (std::size_t n = 0; n < slices_.size(); ++n) {
    const Field& f = slices_[n];
    if (!f.all_finite() || f.min() < 0.0 || f.max() > cap_) {
      std::ostringstream os;
      os << "control: slice " << n << " leaves [0, " << cap_ << "] (min " << f.min() << ", max " << f.max() << ")";
      throw ConfigError(os.str());
    }
    if (mode_ == ControlMode::TimeOnly && f.min() != f.max()) {
      throw ConfigError("control: time-only slice " + std::to_string(n) + " is not spatially constant");
    }
  }
}

std::array<double, 3> reaction_rates(double rho1, double rho2, double v, double u, const ModelParams& p) {
  const double infection = p.beta * rho1 * v;
  return {
      (p.alpha - p.delta1) * rho1 - infection,
      infection - p.delta2 * rho2,
      p.b * p.delta2 * rho2 - p.B * rho1 * v - p.delta_v * v + u,
  };
}

void validate_time_step(const State& s, double dt, const ModelParams& p) {
  const double rate = p.alpha + p.delta2 + p.delta_v + p.beta * norm_linf(s.v) + p.B * norm_linf(s.rho1);
  if (!std::isfinite(rate) || dt * rate > kMaxExplicitRate) {
    std::ostringstream os;
    os << "time step: dt * (alpha + delta2 + delta_v + beta ||v||_inf + B ||rho1||_inf) = " << dt * rate
       << " exceeds " << kMaxExplicitRate;
    throw ConfigError(os.str());
  }
}

namespace {

Field affine(const Field& f, double scale, double offset) {
  Field out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = offset + scale * f[i];
  return out;
}

// The three sub-steps, shared by the IMEX scheme and the Picard sweeps so
// that the Picard fixed point is the IMEX solution.
Field advance_rho1(const Field& rho1, const Field& v_frozen, double dt, const ModelParams& p,
                   const LinearSolveOptions& opts) {
  return step_scalar(rho1, affine(v_frozen, p.beta, p.delta1), p.alpha * rho1, dt, opts);
}

Field advance_rho2(const Field& rho2, const Field& rho1_next, const Field& v_frozen, double dt,
                   const ModelParams& p, const LinearSolveOptions& opts) {
  Field gain = hadamard(rho1_next, v_frozen);
  gain *= p.beta;
  return step_scalar(rho2, Field(rho2.grid(), p.delta2), gain, dt, opts);
}

Field advance_v(const Field& v, const Field& rho1_next, const Field& rho2_next, const Field& u, double dt,
                const ModelParams& p, const LinearSolveOptions& opts) {
  Field gain = u;
  gain.axpy(p.b * p.delta2, rho2_next);
  return step_scalar(v, affine(rho1_next, p.B, p.delta_v), gain, dt, opts);
}

void check_inputs(const InitialData& init, const Control& ctrl, const TimeGrid& time, const ModelParams& p) {
  p.validate();
  init.validate();
  if (ctrl.steps() != time.steps()) {
    throw ConfigError("control has " + std::to_string(ctrl.steps()) + " slices but the time grid has " +
                      std::to_string(time.steps()) + " steps");
  }
  require_same_grid(init.rho1.grid(), ctrl.grid(), "control");
  ctrl.validate();
}

}  // namespace

State step_forward(const State& s, const Field& u, double dt, const ModelParams& p, const LinearSolveOptions& opts) {
  validate_time_step(s, dt, p);
  State next;
  next.rho1 = advance_rho1(s.rho1, s.v, dt, p, opts);
  next.rho2 = advance_rho2(s.rho2, next.rho1, s.v, dt, p, opts);
  next.v = advance_v(s.v, next.rho1, next.rho2, u, dt, p, opts);
  return next;
}

StateTrajectory solve_forward(const InitialData& init, const Control& ctrl, const TimeGrid& time,
                              const ModelParams& p, const LinearSolveOptions& opts) {
  check_inputs(init, ctrl, time, p);
  StateTrajectory traj;
  traj.time = time;
  const int n_t = time.steps();
  traj.rho1.reserve(n_t + 1);
  traj.rho2.reserve(n_t + 1);
  traj.v.reserve(n_t + 1);
  State s = init.state();
  traj.rho1.push_back(s.rho1);
  traj.rho2.push_back(s.rho2);
  traj.v.push_back(s.v);
  for (int n = 0; n < n_t; ++n) {
    s = step_forward(s, ctrl.slice(n), time.dt(), p, opts);
    traj.rho1.push_back(s.rho1);
    traj.rho2.push_back(s.rho2);
    traj.v.push_back(s.v);
  }
  return traj;
}

PicardResult solve_forward_picard(const InitialData& init, const Control& ctrl, const TimeGrid& time,
                                  const ModelParams& p, int max_iter, double tol, const LinearSolveOptions& opts) {
  check_inputs(init, ctrl, time, p);
  if (max_iter < 1) throw ConfigError("picard: max_iter must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("picard: tol must be positive");

  const int n_t = time.steps();
  const double dt = time.dt();
  StateTrajectory iterate;
  iterate.time = time;
  iterate.rho1.assign(n_t + 1, init.rho1);
  iterate.rho2.assign(n_t + 1, init.rho2);
  iterate.v.assign(n_t + 1, init.v);

  auto series_gap = [](const FieldSeries& a, const FieldSeries& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, norm_l2(a[n] - b[n]));
    return m;
  };

  PicardResult result;
  for (int k = 1; k <= max_iter; ++k) {
    StateTrajectory next;
    next.time = time;
    next.rho1.reserve(n_t + 1);
    next.rho2.reserve(n_t + 1);
    next.v.reserve(n_t + 1);
    next.rho1.push_back(init.rho1);
    next.rho2.push_back(init.rho2);
    next.v.push_back(init.v);
    try {
      for (int n = 0; n < n_t; ++n) {
        next.rho1.push_back(advance_rho1(next.rho1[n], iterate.v[n], dt, p, opts));
        next.rho2.push_back(advance_rho2(next.rho2[n], iterate.rho1[n + 1], iterate.v[n], dt, p, opts));
        next.v.push_back(advance_v(next.v[n], iterate.rho1[n + 1], iterate.rho2[n + 1], ctrl.slice(n), dt, p, opts));
      }
    } catch (const ConfigError& e) {
      // Non-finite coefficients: the iterates have blown up.
      throw IterationError(std::string("picard: iteration diverged (") + e.what() + ")",
                           result.increments.empty() ? INFINITY : result.increments.back(), k);
    }
    const double inc = series_gap(next.rho1, iterate.rho1) + series_gap(next.rho2, iterate.rho2) +
                       series_gap(next.v, iterate.v);
    result.increments.push_back(inc);
    iterate = std::move(next);
    if (!std::isfinite(inc)) {
      throw IterationError("picard: iteration diverged", inc, k);
    }
    if (inc < tol) {
      result.trajectory = std::move(iterate);
      result.iterations = k;
      result.last_increment = inc;
      return result;
    }
  }
  std::ostringstream os;
  os << "picard: no convergence after " << max_iter << " iterations (last increment " << result.increments.back()
     << ")";
  throw IterationError(os.str(), result.increments.back(), max_iter);
}

std::array<double, 3> growth_envelopes(const InitialData& init, const ModelParams& p, double u_cap, double t_final) {
  const double r1 = norm_linf(init.rho1);
  const double r2 = norm_linf(init.rho2);
  const double v0 = norm_linf(init.v);
  const double tumor = (r1 + r2) * std::exp(p.alpha * t_final);
  return {
      r1 * std::exp(std::abs(p.alpha - p.delta1) * t_final),
      tumor,
      v0 + (p.b * p.delta2 * tumor + u_cap) * t_final,
  };
}

BoundsReport verify_bounds(const StateTrajectory& traj, const InitialData& init, const ModelParams& p,
                           double u_cap) {
  const auto env = growth_envelopes(init, p, u_cap, traj.time.t_final());
  const FieldSeries* series[] = {&traj.rho1, &traj.rho2, &traj.v};
  const char* names[] = {"rho1", "rho2", "v"};
  BoundsReport rep;
  for (int k = 0; k < 3; ++k) {
    BoundCheck& c = rep.checks[k];
    c.name = names[k];
    c.bound = env[k];
    c.max_value = -INFINITY;
    c.min_value = INFINITY;
    double worst_excess = 0.0;
    const double upper = env[k] * (1.0 + kBoundsRelTol);
    for (std::size_t n = 0; n < series[k]->size(); ++n) {
      const Field& f = (*series[k])[n];
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = f[i];
        c.max_value = std::max(c.max_value, x);
        c.min_value = std::min(c.min_value, x);
        double excess = 0.0;
        if (!std::isfinite(x)) {
          excess = INFINITY;
        } else if (x < -kPositivityTol) {
          excess = -kPositivityTol - x;
        } else if (x > upper) {
          excess = x - upper;
        }
        if (excess > worst_excess) {
          worst_excess = excess;
          c.passed = false;
          c.worst_step = static_cast<int>(n);
          c.worst_cell = i;
        }
      }
    }
    c.slack = c.bound - c.max_value;
    rep.passed = rep.passed && c.passed;
  }
  return rep;
}

void write_timeseries_csv(std::ostream& os, const StateTrajectory& traj) {
  os << std::setprecision(17);
  os << "t,int_rho1,int_rho2,int_v,min_rho1,max_rho1,min_rho2,max_rho2,min_v,max_v\n";
  for (int n = 0; n <= traj.steps(); ++n) {
    const Field& r1 = traj.rho1[n];
    const Field& r2 = traj.rho2[n];
    const Field& v = traj.v[n];
    os << traj.time.time(n) << ',' << integrate(r1) << ',' << integrate(r2) << ',' << integrate(v) << ','
       << r1.min() << ',' << r1.max() << ',' << r2.min() << ',' << r2.max() << ',' << v.min() << ',' << v.max()
       << '\n';
  }
}

void write_trajectory_snapshots(const std::string& dir, const StateTrajectory& traj, int every) {
  std::filesystem::create_directories(dir);
  const int n_t = traj.steps();
  for (int n = 0; n <= n_t; ++n) {
    const bool keep = n == 0 || n == n_t || (every > 0 && n % every == 0);
    if (!keep) continue;
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "_step%06d", n);
    write_snapshot(dir + "/rho1" + suffix, traj.rho1[n]);
    write_snapshot(dir + "/rho2" + suffix, traj.rho2[n]);
    write_snapshot(dir + "/v" + suffix, traj.v[n]);
  }
}

}  // namespace gliocontrol
