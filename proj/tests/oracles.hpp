#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "gliocontrol/model.hpp"

/// Independent reference solutions used by the unit and acceptance tests.
namespace oracle {

using Vec3 = std::array<double, 3>;

/// Spatially uniform reduction of the tumor/virus system.
inline Vec3 ode_rhs(const Vec3& s, double u, const gliocontrol::ModelParams& p) {
  const double r1 = s[0], r2 = s[1], v = s[2];
  return {(p.alpha - p.delta1) * r1 - p.beta * r1 * v, p.beta * r1 * v - p.delta2 * r2,
          p.b * p.delta2 * r2 - p.B * r1 * v - p.delta_v * v + u};
}

/// Classical RK4 for y' = f(t, y) from t0 to t1 with n steps.
inline Vec3 rk4(const std::function<Vec3(double, const Vec3&)>& f, Vec3 y, double t0, double t1, long n) {
  const double h = (t1 - t0) / static_cast<double>(n);
  auto add = [](const Vec3& a, const Vec3& b, double s) { return Vec3{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]}; };
  for (long k = 0; k < n; ++k) {
    const double t = t0 + h * static_cast<double>(k);
    const Vec3 k1 = f(t, y);
    const Vec3 k2 = f(t + 0.5 * h, add(y, k1, 0.5 * h));
    const Vec3 k3 = f(t + 0.5 * h, add(y, k2, 0.5 * h));
    const Vec3 k4 = f(t + h, add(y, k3, h));
    for (int i = 0; i < 3; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return y;
}

/// Uniform state at time T under a constant infusion u.
inline Vec3 ode_state(const Vec3& init, double u, const gliocontrol::ModelParams& p, double t_final, long n) {
  return rk4([&](double, const Vec3& s) { return ode_rhs(s, u, p); }, init, 0.0, t_final, n);
}

/// Backward multipliers (w, y, z) at time t for a zero base state and the
/// terminal data (g1, g2, 0), integrated in reversed time s = T - t:
///   w' = (alpha - delta1) w,  y' = -delta2 y + b delta2 z,  z' = -delta_v z.
inline Vec3 zero_base_adjoint(const Vec3& terminal, const gliocontrol::ModelParams& p, double t_final, double t,
                              long n) {
  auto f = [&](double, const Vec3& a) {
    return Vec3{(p.alpha - p.delta1) * a[0], -p.delta2 * a[1] + p.b * p.delta2 * a[2], -p.delta_v * a[2]};
  };
  return rk4(f, terminal, 0.0, t_final - t, n);
}

/// One backward-Euler IMEX step of the uniform system with the forward
/// solver's splitting, evaluated in plain scalar arithmetic.
inline Vec3 imex_ode_step(const Vec3& s, double u, double dt, const gliocontrol::ModelParams& p) {
  const double r1 = (s[0] + dt * p.alpha * s[0]) / (1.0 + dt * (p.delta1 + p.beta * s[2]));
  const double r2 = (s[1] + dt * p.beta * r1 * s[2]) / (1.0 + dt * p.delta2);
  const double v = (s[2] + dt * (p.b * p.delta2 * r2 + u)) / (1.0 + dt * (p.delta_v + p.B * r1));
  return {r1, r2, v};
}

}  // namespace oracle
