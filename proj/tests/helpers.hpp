#pragma once

#include <array>
#include <cmath>

#include "gliocontrol/fields.hpp"
#include "gliocontrol/model.hpp"

namespace testing {

inline gliocontrol::Grid square(int n, double side = 1.0) {
  const double ext[] = {side, side};
  const int cells[] = {n, n};
  return gliocontrol::Grid::build(2, ext, cells);
}

inline gliocontrol::Grid line(int n, double length = 1.0) {
  const double ext[] = {length};
  const int cells[] = {n};
  return gliocontrol::Grid::build(1, ext, cells);
}

inline gliocontrol::Field bump(const gliocontrol::Grid& g, double cx, double cy, double width, double amp) {
  return gliocontrol::Field::from_function(g, [=](const std::array<double, 2>& x) {
    const double r2 = (x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy);
    return amp * std::exp(-r2 / (2.0 * width * width));
  });
}

inline gliocontrol::ModelParams unit_params() { return gliocontrol::ModelParams{}; }

/// Moderate coupling used across the model tests.
inline gliocontrol::ModelParams coupled_params() {
  gliocontrol::ModelParams p;
  p.alpha = 1.0, p.beta = 1.5, p.delta1 = 0.5, p.delta2 = 0.5, p.delta_v = 0.8, p.b = 1.5, p.B = 1.0, p.u_cap = 1.0;
  return p;
}

inline double max_abs_diff(const gliocontrol::Field& a, const gliocontrol::Field& b) {
  return gliocontrol::norm_linf(a - b);
}

}  // namespace testing
