#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gliocontrol/errors.hpp"
#include "gliocontrol/optimizer.hpp"
#include "gliocontrol/random.hpp"
#include "helpers.hpp"

using namespace gliocontrol;
using testing::bump;
using testing::coupled_params;
using testing::square;

TEST_CASE("projection") {
  Rng rng(71);
  const Grid g = square(4);
  SUBCASE("admissible input is unchanged") {
    const FieldSeries u = rng.series(g, 3, 0.0, 1.0);
    CHECK(project(u, 1.0, ControlMode::SpaceTime).slices() == u);
  }
  SUBCASE("clipping") {
    FieldSeries u(2, Field(g, 0.5));
    u[0][3] = -3.0;
    u[1][5] = 7.0;
    const Control c = project(u, 2.0, ControlMode::SpaceTime);
    CHECK(c.slice(0)[3] == 0.0);
    CHECK(c.slice(1)[5] == 2.0);
    CHECK(c.slice(1)[4] == 0.5);
  }
  SUBCASE("time-only uses the slice mean") {
    Field f(g, 0.2);
    for (std::size_t i = 0; i < 8; ++i) f[i] = 1.8;
    const Control c = project(FieldSeries{f}, 2.0, ControlMode::TimeOnly);
    CHECK(c.slice(0).min() == doctest::Approx(1.0));
    CHECK(c.slice(0).max() == doctest::Approx(1.0));
  }
  SUBCASE("idempotent") {
    const FieldSeries u = rng.series(g, 4, -1.0, 2.0);
    for (ControlMode m : {ControlMode::SpaceTime, ControlMode::TimeOnly}) {
      const Control once = project(u, 1.0, m);
      CHECK(project(once.slices(), 1.0, m) == once);
    }
  }
}

TEST_CASE("stationarity residual") {
  const Grid g = square(4, 2.0);
  const int steps = 10;
  const double dt = 0.1;
  const FieldSeries ones(steps, Field(g, 1.0));
  CHECK(stationarity_residual(Control::constant(g, steps, 0.0, 1.0), ones, dt) == 0.0);
  const double r = stationarity_residual(Control::constant(g, steps, 0.5, 1.0), ones, dt);
  CHECK(r == doctest::Approx(std::sqrt(1.0 * 4.0) * 0.5));
  CHECK(stationarity_residual(Control::constant(g, steps, 1.0, 1.0), FieldSeries(steps, Field(g, -1.0)), dt) == 0.0);
  CHECK_THROWS_AS(stationarity_residual(Control::constant(g, steps, 0.0, 1.0), FieldSeries(3, Field(g)), dt),
                  ConfigError);
}

TEST_CASE("KKT sign report") {
  const Grid g = square(4);
  const FieldSeries pos(2, Field(g, 1.0));
  const FieldSeries neg(2, Field(g, -1.0));
  CHECK(kkt_sign_report(Control::constant(g, 2, 0.0, 1.0), pos, 1e-6).violation_fraction == 0.0);
  CHECK(kkt_sign_report(Control::constant(g, 2, 0.0, 1.0), neg, 1e-6).violation_fraction == 1.0);
  CHECK(kkt_sign_report(Control::constant(g, 2, 1.0, 1.0), neg, 1e-6).violation_fraction == 0.0);
  const KktReport flat = kkt_sign_report(Control::constant(g, 2, 0.5, 1.0), FieldSeries(2, Field(g)), 1e-6);
  CHECK(flat.exempt == flat.total);
  CHECK(flat.violations == 0);
}

TEST_CASE("optimizer options validation") {
  OptimizerOptions o;
  CHECK_NOTHROW(o.validate());
  o.armijo_c = 0.0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o = {};
  o.backtrack_factor = 1.0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o = {};
  o.initial_step = -1.0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
}

TEST_CASE("solve_ocp") {
  const Grid g = square(6);
  const ModelParams p = coupled_params();
  const TimeGrid time(0.2, 40);
  const InitialData init{bump(g, 0.5, 0.5, 0.2, 1.0), Field(g, 0.1), Field(g, 0.3)};
  OptimizerOptions opts;
  opts.max_outer_iterations = 30;

  SUBCASE("pure dose drives the control to zero") {
    const OcpResult r = solve_ocp(init, p, time, Objective(TerminalMassPlusDose{0, 0, 2.0}), opts,
                                  Control::constant(g, 40, 0.5, 1.0));
    CHECK(r.converged);
    for (const Field& f : r.control.slices()) CHECK(norm_linf(f) <= 1e-4);
    CHECK(r.history.records.back().f <= 1e-8);
  }
  SUBCASE("stationary start stops at iteration zero") {
    const OcpResult r = solve_ocp(init, p, time, Objective(TerminalMassPlusDose{0, 0, 2.0}), opts,
                                  Control::constant(g, 40, 0.0, 1.0));
    CHECK(r.converged);
    CHECK(r.history.records.size() == 1);
    CHECK(r.history.records[0].residual == 0.0);
  }
  SUBCASE("objective history is monotone") {
    const OcpResult r = solve_ocp(init, p, time, Objective(ChronicTracking{Field(g, 0.0), 2.0}), opts,
                                  Control::constant(g, 40, 0.5, 1.0));
    const auto& rec = r.history.records;
    REQUIRE(rec.size() >= 2);
    for (std::size_t k = 1; k < rec.size(); ++k) CHECK(rec[k].f <= rec[k - 1].f);
    CHECK(rec.back().residual < rec.front().residual);
    CHECK(r.control.is_admissible());
    std::ostringstream os;
    write_csv(os, r.history);
    CHECK(os.str().rfind("iteration,f,residual,step,backtracks\n", 0) == 0);
  }
  SUBCASE("cap mismatch") {
    CHECK_THROWS_AS(solve_ocp(init, p, time, Objective(TerminalMass{}), opts, Control::constant(g, 40, 0.5, 2.0)),
                    ConfigError);
  }
}
