#include "gliocontrol/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "gliocontrol/errors.hpp"

namespace gliocontrol {

namespace {

struct RunningSources {
  Field d_rho1;
  Field d_rho2;
  Field d_v;
};

RunningSources running_sources(const StateTrajectory& base, const Control& ctrl, const Objective& obj, int n) {
  const Grid& g = base.grid();
  RunningSources s{Field(g), Field(g), Field(g)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PsiGradients pg = obj.gradients(point_at(base, &ctrl, n, i));
    s.d_rho1[i] = pg.d_rho1_psi2;
    s.d_rho2[i] = pg.d_rho2_psi2;
    s.d_v[i] = pg.d_v_psi2;
  }
  return s;
}

void check_base(const StateTrajectory& base, const Control& ctrl) {
  if (ctrl.steps() != base.steps()) throw ConfigError("adjoint: control and base trajectory step counts differ");
  require_same_grid(base.grid(), ctrl.grid(), "adjoint");
}

}  // namespace

std::array<Field, 3> terminal_conditions(const StateTrajectory& base, const Objective& obj) {
  const Grid& g = base.grid();
  std::array<Field, 3> out{Field(g), Field(g), Field(g)};
  const int n_t = base.steps();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PsiGradients pg = obj.gradients(point_at(base, nullptr, n_t, i));
    out[0][i] = pg.d_rho1_psi1;
    out[1][i] = pg.d_rho2_psi1;
    out[2][i] = pg.d_v_psi1;
  }
  return out;
}

AdjointTrajectory solve_adjoint(const StateTrajectory& base, const Control& ctrl, const Objective& obj,
                                const ModelParams& p, const LinearSolveOptions& opts) {
  check_base(base, ctrl);
  const int n_t = base.steps();
  const double dt = base.time.dt();
  const Grid& g = base.grid();
  const LinearizedCoefficients jac = linearize_coeffs(base, p);

  AdjointTrajectory adj;
  adj.time = base.time;
  adj.w.assign(n_t + 1, Field(g));
  adj.y.assign(n_t + 1, Field(g));
  adj.z.assign(n_t + 1, Field(g));
  auto terminal = terminal_conditions(base, obj);
  adj.w[n_t] = std::move(terminal[0]);
  adj.y[n_t] = std::move(terminal[1]);
  adj.z[n_t] = std::move(terminal[2]);

  for (int n = n_t - 1; n >= 0; --n) {
    const int k = n + 1;  // known level
    const RunningSources src = running_sources(base, ctrl, obj, n);

    Field fz = hadamard(jac.d_v_F1[k], adj.w[k]);
    fz += hadamard(jac.d_v_F2[k], adj.y[k]);
    fz += src.d_v;
    adj.z[n] = step_scalar(adj.z[k], -1.0 * jac.d_v_F3[k], fz, dt, opts);

    Field fy = hadamard(jac.d_rho2_F3[k], adj.z[n]);
    fy += src.d_rho2;
    adj.y[n] = step_scalar(adj.y[k], -1.0 * jac.d_rho2_F2[k], fy, dt, opts);

    Field fw = hadamard(jac.d_rho1_F2[k], adj.y[n]);
    fw += hadamard(jac.d_rho1_F3[k], adj.z[n]);
    fw += src.d_rho1;
    adj.w[n] = step_scalar(adj.w[k], -1.0 * jac.d_rho1_F1[k], fw, dt, opts);
  }
  return adj;
}

FieldSeries reduced_gradient(const FieldSeries& adjoint_z, const StateTrajectory& base, const Control& ctrl,
                             const Objective& obj) {
  check_base(base, ctrl);
  const int n_t = ctrl.steps();
  if (static_cast<int>(adjoint_z.size()) < n_t) throw ConfigError("reduced_gradient: adjoint too short");
  const Grid& g = ctrl.grid();
  FieldSeries grad;
  grad.reserve(n_t);
  for (int n = 0; n < n_t; ++n) {
    require_same_grid(g, adjoint_z[n].grid(), "reduced_gradient");
    Field gn = adjoint_z[n];
    for (std::size_t i = 0; i < g.size(); ++i) gn[i] += obj.gradients(point_at(base, &ctrl, n, i)).d_u_psi2;
    if (ctrl.mode() == ControlMode::TimeOnly) gn = Field(g, gn.mean());
    grad.push_back(std::move(gn));
  }
  return grad;
}

double spacetime_inner(const FieldSeries& a, const FieldSeries& b, double dt, int steps) {
  double s = 0.0;
  for (int n = 0; n < steps; ++n) s += inner(a[n], b[n]);
  return dt * s;
}

DualityReport duality_check(const TangentTrajectory& tangent, const AdjointTrajectory& adjoint,
                            const FieldSeries& delta_u, const Objective& obj, const StateTrajectory& base,
                            const Control& ctrl) {
  check_base(base, ctrl);
  const int n_t = base.steps();
  const auto levels = static_cast<std::size_t>(n_t) + 1;
  if (!(adjoint.time == base.time) || adjoint.z.size() != levels || tangent.X.size() != levels ||
      tangent.Y.size() != levels || tangent.Z.size() != levels) {
    throw ConfigError("duality_check: tangent, adjoint and base trajectory do not share time levels");
  }
  if (static_cast<int>(delta_u.size()) < n_t) throw ConfigError("duality_check: delta_u too short");
  const Grid& g = base.grid();
  require_same_grid(g, tangent.X.front().grid(), "duality_check");
  require_same_grid(g, adjoint.z.front().grid(), "duality_check");

  const double dt = base.time.dt();
  const double vol = g.cell_volume();
  DualityReport rep;
  double terminal = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PsiGradients pg = obj.gradients(point_at(base, nullptr, n_t, i));
    terminal += pg.d_rho1_psi1 * tangent.X[n_t][i] + pg.d_rho2_psi1 * tangent.Y[n_t][i] +
                pg.d_v_psi1 * tangent.Z[n_t][i];
  }
  double running = 0.0;
  for (int n = 0; n < n_t; ++n) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const PsiGradients pg = obj.gradients(point_at(base, &ctrl, n, i));
      running += pg.d_rho1_psi2 * tangent.X[n][i] + pg.d_rho2_psi2 * tangent.Y[n][i] + pg.d_v_psi2 * tangent.Z[n][i];
    }
  }
  rep.lhs = vol * terminal + dt * vol * running;
  rep.rhs = spacetime_inner(delta_u, adjoint.z, dt, n_t);
  rep.residual = std::abs(rep.lhs - rep.rhs) / (std::abs(rep.lhs) + std::abs(rep.rhs) + kRelativeEps);
  return rep;
}

GradientCheckReport gradient_check(const InitialData& init, const Control& u_star, const Objective& obj,
                                   const ModelParams& p, const TimeGrid& time,
                                   const std::vector<FieldSeries>& directions, double eps,
                                   const LinearSolveOptions& opts) {
  if (!(eps > 0.0)) throw ConfigError("gradient_check: eps must be positive");
  const StateTrajectory base = solve_forward(init, u_star, time, p, opts);
  const AdjointTrajectory adj = solve_adjoint(base, u_star, obj, p, opts);
  const FieldSeries grad = reduced_gradient(adj.z, base, u_star, obj);
  const double dt = time.dt();

  auto shifted = [&](const FieldSeries& d, double s) {
    FieldSeries slices = u_star.slices();
    for (std::size_t n = 0; n < slices.size(); ++n) slices[n].axpy(s, d[n]);
    Control c(u_star.mode(), u_star.cap(), std::move(slices));
    if (!c.is_admissible()) throw ConfigError("gradient_check: probe control leaves the admissible set");
    return c;
  };

  GradientCheckReport rep;
  for (const FieldSeries& d : directions) {
    if (static_cast<int>(d.size()) != u_star.steps()) throw ConfigError("gradient_check: direction shape mismatch");
    const double f_plus = eval_reduced(shifted(d, eps), init, p, time, obj, opts);
    const double f_minus = eval_reduced(shifted(d, -eps), init, p, time, obj, opts);
    rep.finite_difference.push_back((f_plus - f_minus) / (2.0 * eps));
    rep.adjoint.push_back(spacetime_inner(grad, d, dt, u_star.steps()));
  }
  double dot = 0.0, nf = 0.0, na = 0.0, diff = 0.0;
  for (std::size_t k = 0; k < rep.adjoint.size(); ++k) {
    const double f = rep.finite_difference[k];
    const double a = rep.adjoint[k];
    dot += f * a;
    nf += f * f;
    na += a * a;
    diff += (f - a) * (f - a);
  }
  rep.cosine = dot / (std::sqrt(nf * na) + kRelativeEps);
  rep.relative_error = std::sqrt(diff) / (std::sqrt(nf) + kRelativeEps);
  return rep;
}

void write_csv(std::ostream& os, const GradientCheckReport& report) {
  os << std::setprecision(17) << "direction,finite_difference,adjoint,relative_error\n";
  for (std::size_t k = 0; k < report.adjoint.size(); ++k) {
    const double f = report.finite_difference[k];
    const double a = report.adjoint[k];
    os << k << ',' << f << ',' << a << ',' << std::abs(f - a) / (std::abs(f) + kRelativeEps) << '\n';
  }
}

}  // namespace gliocontrol
