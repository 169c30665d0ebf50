#include "gliocontrol/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "gliocontrol/errors.hpp"

namespace gliocontrol {

LinearizedCoefficients linearize_coeffs(const StateTrajectory& base, const ModelParams& p) {
  LinearizedCoefficients c;
  c.time = base.time;
  const Grid& g = base.grid();
  const Field minus_delta2(g, -p.delta2);
  const Field b_delta2(g, p.b * p.delta2);
  for (int n = 0; n <= base.steps(); ++n) {
    const Field& r1 = base.rho1[n];
    const Field& v = base.v[n];
    Field f11(g), fv1(g), f12(g), fv2(g), f13(g), fv3(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      f11[i] = p.alpha - p.delta1 - p.beta * v[i];
      fv1[i] = -p.beta * r1[i];
      f12[i] = p.beta * v[i];
      fv2[i] = p.beta * r1[i];
      f13[i] = -p.B * v[i];
      fv3[i] = -p.B * r1[i] - p.delta_v;
    }
    c.d_rho1_F1.push_back(std::move(f11));
    c.d_v_F1.push_back(std::move(fv1));
    c.d_rho1_F2.push_back(std::move(f12));
    c.d_rho2_F2.push_back(minus_delta2);
    c.d_v_F2.push_back(std::move(fv2));
    c.d_rho1_F3.push_back(std::move(f13));
    c.d_rho2_F3.push_back(b_delta2);
    c.d_v_F3.push_back(std::move(fv3));
  }
  return c;
}

TangentTrajectory solve_linearized(const LinearizedCoefficients& coeffs, const FieldSeries& delta_u,
                                   const ModelParams& p, const LinearSolveOptions& opts) {
  const int n_t = coeffs.time.steps();
  if (static_cast<int>(coeffs.d_rho1_F1.size()) != n_t + 1) {
    throw ConfigError("solve_linearized: coefficients must cover steps + 1 time levels");
  }
  if (static_cast<int>(delta_u.size()) < n_t) {
    throw ConfigError("solve_linearized: delta_u needs one field per time step");
  }
  const Grid& g = coeffs.d_rho1_F1.front().grid();
  for (const Field& f : delta_u) require_same_grid(g, f.grid(), "solve_linearized");
  const double dt = coeffs.time.dt();

  TangentTrajectory t;
  t.X.assign(1, Field(g));
  t.Y.assign(1, Field(g));
  t.Z.assign(1, Field(g));
  const Field delta2(g, p.delta2);
  for (int n = 0; n < n_t; ++n) {
    // Same limit as validate_time_step: beta ||v_n|| + B ||rho1_n||.
    const double rate = dt * (p.alpha + p.delta2 + p.delta_v + norm_linf(coeffs.d_rho1_F2[n]) +
                              (p.B / p.beta) * norm_linf(coeffs.d_v_F2[n]));
    if (!(rate <= kMaxExplicitRate)) {
      throw ConfigError("solve_linearized: time step exceeds the explicit-rate limit at step " + std::to_string(n));
    }
    const Field& Xn = t.X[n];
    const Field& Yn = t.Y[n];
    const Field& Zn = t.Z[n];

    // rho1: implicit delta1 + beta v_n = alpha - dF1/drho1, explicit alpha X_n,
    // coupling -beta rho1_{n+1} Z_n.
    Field c1(g);
    for (std::size_t i = 0; i < g.size(); ++i) c1[i] = p.alpha - coeffs.d_rho1_F1[n][i];
    Field f1 = p.alpha * Xn;
    f1 += hadamard(coeffs.d_v_F1[n + 1], Zn);
    Field X = step_scalar(Xn, c1, f1, dt, opts);

    // rho2: implicit delta2, explicit beta (v_n X_{n+1} + rho1_{n+1} Z_n).
    Field f2 = hadamard(coeffs.d_rho1_F2[n], X);
    f2 += hadamard(coeffs.d_v_F2[n + 1], Zn);
    Field Y = step_scalar(Yn, delta2, f2, dt, opts);

    // v: implicit delta_v + B rho1_{n+1}, explicit b delta2 Y_{n+1}
    // - B v_{n+1} X_{n+1} + du_n.
    Field c3 = -1.0 * coeffs.d_v_F3[n + 1];
    Field f3 = hadamard(coeffs.d_rho2_F3[n + 1], Y);
    f3 += hadamard(coeffs.d_rho1_F3[n + 1], X);
    f3 += delta_u[n];
    Field Z = step_scalar(Zn, c3, f3, dt, opts);

    t.X.push_back(std::move(X));
    t.Y.push_back(std::move(Y));
    t.Z.push_back(std::move(Z));
  }
  return t;
}

double trajectory_distance(const FieldSeries& a1, const FieldSeries& a2, const FieldSeries& a3,
                           const FieldSeries& b1, const FieldSeries& b2, const FieldSeries& b3) {
  auto gap = [](const FieldSeries& a, const FieldSeries& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, norm_l2(a[n] - b[n]));
    return m;
  };
  return gap(a1, b1) + gap(a2, b2) + gap(a3, b3);
}

ConvergenceReport directional_derivative_check(const InitialData& init, const Control& u_star,
                                               const FieldSeries& delta_u, const std::vector<double>& lambdas,
                                               const TimeGrid& time, const ModelParams& p,
                                               const LinearSolveOptions& opts) {
  if (static_cast<int>(delta_u.size()) != u_star.steps()) {
    throw ConfigError("directional_derivative_check: delta_u must have one field per control slice");
  }
  // Probe admissibility is checked before any solve.
  std::vector<Control> probes;
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw ConfigError("directional_derivative_check: lambdas must be positive");
    FieldSeries slices = u_star.slices();
    for (std::size_t n = 0; n < slices.size(); ++n) slices[n].axpy(lambda, delta_u[n]);
    Control probe(u_star.mode(), u_star.cap(), std::move(slices));
    if (!probe.is_admissible()) {
      throw ConfigError("directional_derivative_check: probe control at lambda = " + std::to_string(lambda) +
                        " leaves the admissible set; choose an interior base control");
    }
    probes.push_back(std::move(probe));
  }

  const StateTrajectory base = solve_forward(init, u_star, time, p, opts);
  const TangentTrajectory tangent = solve_linearized(linearize_coeffs(base, p), delta_u, p, opts);

  ConvergenceReport rep;
  const FieldSeries zero(static_cast<std::size_t>(time.steps()) + 1, Field(base.grid()));
  rep.tangent_norm = trajectory_distance(tangent.X, tangent.Y, tangent.Z, zero, zero, zero);
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double lambda = lambdas[k];
    const StateTrajectory perturbed = solve_forward(init, probes[k], time, p, opts);
    FieldSeries q1, q2, q3;
    for (int n = 0; n <= time.steps(); ++n) {
      q1.push_back((1.0 / lambda) * (perturbed.rho1[n] - base.rho1[n]));
      q2.push_back((1.0 / lambda) * (perturbed.rho2[n] - base.rho2[n]));
      q3.push_back((1.0 / lambda) * (perturbed.v[n] - base.v[n]));
    }
    ConvergenceRow row;
    row.lambda = lambda;
    row.error = trajectory_distance(q1, q2, q3, tangent.X, tangent.Y, tangent.Z);
    if (k > 0) {
      const double prev = rep.rows.back().error;
      row.ratio = row.error > 0.0 ? prev / row.error : 0.0;
      if (rep.floor_index < 0 && prev > 0.0 && row.ratio < kFirstOrderRatioMin) {
        rep.floor_index = static_cast<int>(k);
      }
    }
    row.at_floor = rep.floor_index >= 0;
    rep.rows.push_back(row);
  }
  return rep;
}

void write_csv(std::ostream& os, const ConvergenceReport& report) {
  os << std::setprecision(17) << "lambda,error,ratio,at_floor\n";
  for (const ConvergenceRow& r : report.rows) {
    os << r.lambda << ',' << r.error << ',' << r.ratio << ',' << (r.at_floor ? 1 : 0) << '\n';
  }
}

}  // namespace gliocontrol
