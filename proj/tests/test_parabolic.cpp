#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gliocontrol/errors.hpp"
#include "gliocontrol/parabolic.hpp"
#include "gliocontrol/random.hpp"
#include "helpers.hpp"

using namespace gliocontrol;
using testing::line;
using testing::square;

namespace {

ScalarParabolicProblem uniform_problem(const Grid& g, double g0, double c, double f, double t_final, int steps) {
  return {Field(g, g0), FieldSeries(steps, Field(g, c)), FieldSeries(steps, Field(g, f)), TimeGrid(t_final, steps)};
}

}  // namespace

TEST_CASE("step_scalar on simple data") {
  const Grid g = square(6);
  const double dt = 0.1;
  CHECK(norm_linf(step_scalar(Field(g), Field(g, -2.0), Field(g), dt)) == 0.0);
  CHECK(norm_linf(step_scalar(Field(g), Field(g, 3.0), Field(g), dt)) == 0.0);

  const Field decay = step_scalar(Field(g, 1.0), Field(g, 2.0), Field(g), dt);
  CHECK(decay.min() == doctest::Approx(1.0 / 1.2).epsilon(1e-14));
  CHECK(decay.max() == doctest::Approx(1.0 / 1.2).epsilon(1e-14));

  const Field growth = step_scalar(Field(g, 1.0), Field(g, -2.0), Field(g), dt);
  CHECK(growth.min() == doctest::Approx(1.2).epsilon(1e-14));
  CHECK(growth.max() == doctest::Approx(1.2).epsilon(1e-14));
}

TEST_CASE("step_scalar rejects oversized explicit reaction and bad input") {
  const Grid g = square(4);
  CHECK_THROWS_AS(step_scalar(Field(g, 1.0), Field(g, -20.0), Field(g), 0.1), ConfigError);
  CHECK_THROWS_AS(step_scalar(Field(g, 1.0), Field(g), Field(g), 0.0), ConfigError);
  Field bad(g);
  bad[2] = std::nan("");
  CHECK_THROWS_AS(step_scalar(bad, Field(g), Field(g), 0.1), ConfigError);
}

TEST_CASE("CG failure surfaces as a solver error") {
  Rng rng(3);
  const Grid g = square(16);
  LinearSolveOptions opts;
  opts.max_iterations = 1;
  opts.tolerance = 1e-14;
  CHECK_THROWS_AS(solve_shifted_diffusion(Field(g, 1.0), 1.0, rng.field(g, 0.0, 1.0), opts), SolverError);
}

TEST_CASE("shifted diffusion solve satisfies its equation") {
  Rng rng(5);
  const Grid g = square(12);
  const Field shift = Field(g, 1.0) + rng.field(g, 0.0, 2.0);
  const Field rhs = rng.field(g, -1.0, 1.0);
  const double dt = 0.05;
  CgStats stats;
  const Field x = solve_shifted_diffusion(shift, dt, rhs, {}, &stats);
  const Field residual = hadamard(shift, x) - dt * laplacian(x) - rhs;
  CHECK(norm_l2(residual) <= 1e-9 * norm_l2(rhs));
  CHECK(stats.iterations > 0);
  CHECK(stats.relative_residual <= 1e-10);
}

TEST_CASE("solve_scalar closed forms") {
  const Grid g = square(4);
  SUBCASE("constant decay") {
    const FieldSeries u = solve_scalar(uniform_problem(g, 1.0, 1.0, 0.0, 1.0, 10000));
    CHECK(u.size() == 10001);
    CHECK(std::abs(u.back().mean() - std::exp(-1.0)) / std::exp(-1.0) <= 1e-3);
  }
  SUBCASE("pure source is integrated exactly") {
    const FieldSeries u = solve_scalar(uniform_problem(g, 0.0, 0.0, 1.0, 1.0, 64));
    for (int n = 0; n <= 64; ++n) CHECK(u[n].mean() == doctest::Approx(n / 64.0).epsilon(1e-14));
  }
  SUBCASE("heat eigenmode") {
    constexpr double pi = std::numbers::pi;
    const Grid l = line(128);
    const Field g0 = Field::from_function(l, [](const std::array<double, 2>& x) { return std::cos(pi * x[0]); });
    const ScalarParabolicProblem pb{g0, FieldSeries(1000, Field(l)), FieldSeries(1000, Field(l)), TimeGrid(0.1, 1000)};
    const Field exact = std::exp(-pi * pi * 0.1) * g0;
    CHECK(norm_l2(solve_scalar(pb).back() - exact) <= 1e-3 * norm_l2(exact));
  }
}

TEST_CASE("first-order time accuracy on constant decay") {
  const Grid g = line(4);
  auto error = [&](int steps) {
    return std::abs(solve_scalar(uniform_problem(g, 1.0, 1.0, 0.0, 1.0, steps)).back().mean() - std::exp(-1.0));
  };
  const double ratio = error(500) / error(1000);
  CHECK(ratio >= 1.7);
  CHECK(ratio <= 2.3);
}

TEST_CASE("positivity and maximum-principle bound for sign-indefinite reaction") {
  Rng rng(17);
  const Grid g = square(10);
  const TimeGrid time(0.5, 100);
  for (int draw = 0; draw < 10; ++draw) {
    const FieldSeries c = rng.series(g, time.steps(), -2.0, 2.0);
    const FieldSeries f = rng.series(g, time.steps(), 0.0, 1.0);
    const Field g0 = rng.field(g, 0.0, 1.0);
    const FieldSeries u = solve_scalar({g0, c, f, time});
    for (int n = 0; n <= time.steps(); ++n) {
      CHECK(u[n].min() >= -1e-12);
      CHECK(u[n].max() <= max_principle_bound(norm_linf(g0), 1.0, 2.0, time.time(n)) * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("solve_scalar is linear in data and source") {
  Rng rng(19);
  const Grid g = square(8);
  const TimeGrid time(0.2, 20);
  const FieldSeries c = rng.series(g, time.steps(), -1.0, 1.0);
  const FieldSeries f1 = rng.series(g, time.steps(), -1.0, 1.0);
  const FieldSeries f2 = rng.series(g, time.steps(), -1.0, 1.0);
  const Field g1 = rng.field(g, -1.0, 1.0);
  const Field g2 = rng.field(g, -1.0, 1.0);
  FieldSeries f12 = f1;
  for (std::size_t n = 0; n < f12.size(); ++n) f12[n] += f2[n];
  LinearSolveOptions tight;
  tight.tolerance = 1e-14;
  const FieldSeries a = solve_scalar({g1, c, f1, time}, tight);
  const FieldSeries b = solve_scalar({g2, c, f2, time}, tight);
  const FieldSeries ab = solve_scalar({g1 + g2, c, f12, time}, tight);
  for (int n = 0; n <= time.steps(); ++n) CHECK(norm_l2(ab[n] - a[n] - b[n]) <= 1e-9 * norm_l2(ab[n]));
}

TEST_CASE("max_principle_bound values") {
  CHECK(max_principle_bound(1.0, 0.0, 0.0, 5.0) == 1.0);
  CHECK(max_principle_bound(0.0, 2.0, 0.0, 3.0) == 6.0);
  CHECK(max_principle_bound(1.0, 1.0, 1.0, 1.0) == doctest::Approx(2.0 * std::exp(1.0) - 1.0));
  CHECK_THROWS_AS(max_principle_bound(-1.0, 0.0, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(max_principle_bound(1.0, 0.0, -1.0, 1.0), ConfigError);
}

TEST_CASE("stability_gap") {
  Rng rng(23);
  const Grid g = square(8);
  const TimeGrid time(1.0, 100);
  const FieldSeries c = rng.series(g, time.steps(), -0.5, 1.0);
  const FieldSeries f1 = rng.series(g, time.steps(), 0.0, 1.0);
  const Field g0 = rng.field(g, 0.0, 1.0);
  const FieldSeries u1 = solve_scalar({g0, c, f1, time});

  SUBCASE("identical problems") {
    const StabilityReport rep = stability_gap(u1, u1, f1, f1, 1.0, time, time);
    CHECK(rep.passed);
    for (double x : rep.lhs) CHECK(x == 0.0);
  }
  SUBCASE("perturbed source") {
    for (double eps : {1e-3, 1e-1}) {
      FieldSeries f2 = f1;
      for (Field& f : f2) f += Field(g, eps);
      const FieldSeries u2 = solve_scalar({g0, c, f2, time});
      const StabilityReport rep = stability_gap(u1, u2, f1, f2, 1.0, time, time);
      CHECK(rep.passed);
      CHECK(rep.worst_ratio <= 1.0);
    }
  }
  SUBCASE("mismatched time grids") {
    CHECK_THROWS_AS(stability_gap(u1, u1, f1, f1, 1.0, time, TimeGrid(2.0, 100)), ConfigError);
  }
}
