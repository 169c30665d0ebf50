#pragma once

#include <cstdint>
#include <random>

#include "gliocontrol/fields.hpp"

namespace gliocontrol {

/// Seeded generator whose draws do not depend on the standard library's
/// distribution implementations, so runs reproduce across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [lo, hi).
  double uniform(double lo = 0.0, double hi = 1.0) {
    const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
  }

  Field field(const Grid& grid, double lo, double hi) {
    Field f(grid);
    for (double& x : f.values()) x = uniform(lo, hi);
    return f;
  }

  /// `steps` slices in [lo, hi); spatially constant slices when `spatially_constant`.
  FieldSeries series(const Grid& grid, int steps, double lo, double hi, bool spatially_constant = false) {
    FieldSeries out;
    out.reserve(steps);
    for (int n = 0; n < steps; ++n) {
      out.push_back(spatially_constant ? Field(grid, uniform(lo, hi)) : field(grid, lo, hi));
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gliocontrol
