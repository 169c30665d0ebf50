#include "gliocontrol/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "gliocontrol/errors.hpp"

namespace gliocontrol {

void OptimizerOptions::validate() const {
  if (max_outer_iterations < 0) throw ConfigError("optimizer: max_outer_iterations must be >= 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ConfigError("optimizer: armijo_c must be in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw ConfigError("optimizer: backtrack_factor must be in (0, 1)");
  }
  if (!(initial_step > 0.0)) throw ConfigError("optimizer: initial_step must be positive");
  if (!(stationarity_tol >= 0.0)) throw ConfigError("optimizer: stationarity_tol must be >= 0");
  if (max_backtracks < 0) throw ConfigError("optimizer: max_backtracks must be >= 0");
}

Control project(const FieldSeries& u_raw, double cap, ControlMode mode) {
  if (!(cap > 0.0)) throw ConfigError("project: cap must be positive");
  FieldSeries out;
  out.reserve(u_raw.size());
  for (const Field& f : u_raw) {
    const bool average = mode == ControlMode::TimeOnly && f.min() != f.max();
    Field slice = average ? Field(f.grid(), f.mean()) : f;
    for (double& x : slice.values()) x = std::clamp(x, 0.0, cap);
    out.push_back(std::move(slice));
  }
  return Control(mode, cap, std::move(out));
}

namespace {

FieldSeries gradient_step(const Control& u, const FieldSeries& grad, double s) {
  FieldSeries trial = u.slices();
  for (std::size_t n = 0; n < trial.size(); ++n) trial[n].axpy(-s, grad[n]);
  return trial;
}

double squared_distance(const Control& a, const Control& b, double dt) {
  double s = 0.0;
  for (int n = 0; n < a.steps(); ++n) {
    const double d = norm_l2(a.slice(n) - b.slice(n));
    s += dt * d * d;
  }
  return s;
}

}  // namespace

double stationarity_residual(const Control& u, const FieldSeries& grad, double dt) {
  if (static_cast<int>(grad.size()) != u.steps()) throw ConfigError("stationarity_residual: shape mismatch");
  const Control projected = project(gradient_step(u, grad, 1.0), u.cap(), u.mode());
  return std::sqrt(squared_distance(u, projected, dt));
}

OcpResult solve_ocp(const InitialData& init, const ModelParams& p, const TimeGrid& time, const Objective& obj,
                    const OptimizerOptions& opts, const Control& u_init, const LinearSolveOptions& lin) {
  opts.validate();
  u_init.validate();
  if (u_init.cap() != p.u_cap) throw ConfigError("solve_ocp: control cap differs from params.u_cap");
  const double dt = time.dt();

  OcpResult res;
  res.control = u_init;
  res.state = solve_forward(init, res.control, time, p, lin);
  double f = eval_J(res.state, res.control, obj);

  for (int it = 0;; ++it) {
    res.adjoint = solve_adjoint(res.state, res.control, obj, p, lin);
    res.gradient = reduced_gradient(res.adjoint.z, res.state, res.control, obj);
    const double residual = stationarity_residual(res.control, res.gradient, dt);
    IterationRecord rec{it, f, residual, 0.0, 0};
    if (residual <= opts.stationarity_tol) {
      res.converged = true;
      res.history.records.push_back(rec);
      return res;
    }
    if (it >= opts.max_outer_iterations) {
      res.history.records.push_back(rec);
      return res;
    }

    double s = opts.initial_step;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      Control trial = project(gradient_step(res.control, res.gradient, s), p.u_cap, res.control.mode());
      const double move = squared_distance(trial, res.control, dt);
      StateTrajectory trial_state = solve_forward(init, trial, time, p, lin);
      const double f_trial = eval_J(trial_state, trial, obj);
      if (move > 0.0 && f_trial <= f - opts.armijo_c / s * move) {
        rec.step = s;
        rec.backtracks = bt;
        res.control = std::move(trial);
        res.state = std::move(trial_state);
        f = f_trial;
        accepted = true;
        break;
      }
      s *= opts.backtrack_factor;
    }
    res.history.records.push_back(rec);
    if (!accepted) {
      res.stalled = true;
      res.history.records.back().backtracks = opts.max_backtracks + 1;
      return res;
    }
  }
}

KktReport kkt_sign_report(const Control& u, const FieldSeries& grad, double tol) {
  if (static_cast<int>(grad.size()) != u.steps()) throw ConfigError("kkt_sign_report: shape mismatch");
  KktReport rep;
  for (int n = 0; n < u.steps(); ++n) {
    const Field& un = u.slice(n);
    for (std::size_t i = 0; i < un.size(); ++i) {
      const double g = grad[n][i];
      ++rep.total;
      if (std::abs(g) <= tol) {
        ++rep.exempt;
      } else if ((g > tol && un[i] != 0.0) || (g < -tol && un[i] != u.cap())) {
        ++rep.violations;
      }
    }
  }
  rep.violation_fraction = rep.total ? static_cast<double>(rep.violations) / static_cast<double>(rep.total) : 0.0;
  return rep;
}

void write_csv(std::ostream& os, const OptimizationHistory& history) {
  os << std::setprecision(17) << "iteration,f,residual,step,backtracks\n";
  for (const IterationRecord& r : history.records) {
    os << r.iteration << ',' << r.f << ',' << r.residual << ',' << r.step << ',' << r.backtracks << '\n';
  }
}

}  // namespace gliocontrol
