#include "gliocontrol/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gliocontrol/errors.hpp"

namespace gliocontrol {

namespace {

// y = shift .* x - dt * lap(x)
void apply_operator(const Field& shift, double dt, const Field& x, Field& y) {
  const Field lx = laplacian(x);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = shift[i] * x[i] - dt * lx[i];
}

// Diagonal of -lap under mirror ghosts: 2/h^2 per axis in the interior,
// 1/h^2 per boundary side.
Field laplacian_diagonal(const Grid& g) {
  Field d(g);
  if (g.dim() == 1) {
    const int n = g.cells(0);
    const double ih2 = 1.0 / (g.spacing(0) * g.spacing(0));
    for (int i = 0; i < n; ++i) d[i] = ((i > 0) + (i + 1 < n)) * ih2;
    return d;
  }
  const int n0 = g.cells(0);
  const int n1 = g.cells(1);
  const double ih0 = 1.0 / (g.spacing(0) * g.spacing(0));
  const double ih1 = 1.0 / (g.spacing(1) * g.spacing(1));
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      d[static_cast<std::size_t>(i) * n1 + j] = ((i > 0) + (i + 1 < n0)) * ih0 + ((j > 0) + (j + 1 < n1)) * ih1;
    }
  }
  return d;
}

double dot(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void require_finite(const Field& f, const char* what) {
  if (!f.all_finite()) throw ConfigError(std::string(what) + ": non-finite values");
}

}  // namespace

Field solve_shifted_diffusion(const Field& shift, double dt, const Field& rhs, const LinearSolveOptions& opts,
                              CgStats* stats) {
  require_same_grid(shift.grid(), rhs.grid(), "solve_shifted_diffusion");
  if (!(opts.tolerance > 0.0 && opts.tolerance < 1.0)) throw ConfigError("linear solve: tolerance must be in (0, 1)");
  const Grid& g = rhs.grid();
  const int max_it = opts.max_iterations > 0 ? opts.max_iterations : static_cast<int>(10 * g.size());

  Field x(g);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rhs[i] / shift[i];

  const double bnorm = std::sqrt(dot(rhs, rhs));
  if (bnorm == 0.0) {
    if (stats) *stats = CgStats{0, 0.0};
    return Field(g);
  }

  Field diag = laplacian_diagonal(g);
  for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = shift[i] + dt * diag[i];

  Field r(g);
  apply_operator(shift, dt, x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
  double rnorm = std::sqrt(dot(r, r));
  if (rnorm <= opts.tolerance * bnorm) {
    if (stats) *stats = CgStats{0, rnorm / bnorm};
    return x;
  }

  Field z(g);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = r[i] / diag[i];
  Field p = z;
  Field ap(g);
  double rz = dot(r, z);
  for (int it = 1; it <= max_it; ++it) {
    apply_operator(shift, dt, p, ap);
    const double alpha = rz / dot(p, ap);
    x.axpy(alpha, p);
    r.axpy(-alpha, ap);
    rnorm = std::sqrt(dot(r, r));
    if (!std::isfinite(rnorm)) break;
    if (rnorm <= opts.tolerance * bnorm) {
      if (stats) *stats = CgStats{it, rnorm / bnorm};
      return x;
    }
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = r[i] / diag[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("conjugate gradients did not converge (relative residual " + std::to_string(rnorm / bnorm) + ")",
                    rnorm / bnorm, max_it);
}

Field step_scalar(const Field& u, const Field& c, const Field& f, double dt, const LinearSolveOptions& opts) {
  if (!(dt > 0.0)) throw ConfigError("step_scalar: dt must be positive");
  require_same_grid(u.grid(), c.grid(), "step_scalar");
  require_same_grid(u.grid(), f.grid(), "step_scalar");
  require_finite(u, "step_scalar: state");
  require_finite(c, "step_scalar: reaction");
  require_finite(f, "step_scalar: source");

  const Grid& g = u.grid();
  Field shift(g);
  Field rhs(g);
  double neg_sup = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double cp = std::max(c[i], 0.0);
    const double cm = std::min(c[i], 0.0);
    neg_sup = std::max(neg_sup, -cm);
    shift[i] = 1.0 + dt * cp;
    rhs[i] = u[i] + dt * (f[i] - cm * u[i]);
  }
  if (dt * neg_sup > 1.0) {
    throw ConfigError("step_scalar: dt * ||c-||_inf = " + std::to_string(dt * neg_sup) +
                      " exceeds 1; reduce the time step");
  }
  return solve_shifted_diffusion(shift, dt, rhs, opts);
}

FieldSeries solve_scalar(const ScalarParabolicProblem& problem, const LinearSolveOptions& opts) {
  const int n_t = problem.time.steps();
  if (static_cast<int>(problem.reaction.size()) < n_t || static_cast<int>(problem.source.size()) < n_t) {
    throw ConfigError("solve_scalar: reaction and source need one field per time step");
  }
  const double dt = problem.time.dt();
  FieldSeries out;
  out.reserve(n_t + 1);
  out.push_back(problem.initial);
  for (int n = 0; n < n_t; ++n) out.push_back(step_scalar(out.back(), problem.reaction[n], problem.source[n], dt, opts));
  return out;
}

double max_principle_bound(double g_sup, double f_sup, double c_inf_norm, double t) {
  if (g_sup < 0.0 || f_sup < 0.0 || c_inf_norm < 0.0 || t < 0.0) {
    throw ConfigError("max_principle_bound: arguments must be nonnegative");
  }
  if (c_inf_norm == 0.0) return g_sup + f_sup * t;
  const double ratio = f_sup / c_inf_norm;
  return (g_sup + ratio) * std::exp(c_inf_norm * t) - ratio;
}

StabilityReport stability_gap(const FieldSeries& traj1, const FieldSeries& traj2, const FieldSeries& f1,
                              const FieldSeries& f2, double c_norm, const TimeGrid& time1, const TimeGrid& time2,
                              double slack) {
  if (!(time1 == time2)) throw ConfigError("stability_gap: time grids differ");
  const int n_t = time1.steps();
  if (static_cast<int>(traj1.size()) != n_t + 1 || static_cast<int>(traj2.size()) != n_t + 1) {
    throw ConfigError("stability_gap: trajectories must hold steps + 1 fields");
  }
  if (static_cast<int>(f1.size()) < n_t || static_cast<int>(f2.size()) < n_t) {
    throw ConfigError("stability_gap: sources need one field per time step");
  }
  require_same_grid(traj1.front().grid(), traj2.front().grid(), "stability_gap");

  const double c_o = std::max(1.0, c_norm);
  const double dt = time1.dt();
  StabilityReport rep;
  double source_gap = 0.0;
  for (int n = 0; n <= n_t; ++n) {
    const double t = time1.time(n);
    const double lhs = std::pow(norm_l2(traj1[n] - traj2[n]), 2);
    const double rhs = std::exp(2.0 * c_o * t) * source_gap;
    rep.times.push_back(t);
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(rhs);
    if (rhs > 0.0) {
      rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
      if (lhs > slack * rhs) rep.passed = false;
    } else if (lhs > 0.0) {
      rep.passed = false;
    }
    if (n < n_t) source_gap += dt * std::pow(norm_l2(f1[n] - f2[n]), 2);
  }
  return rep;
}

}  // namespace gliocontrol
