#include <doctest.h>

#include <cmath>

#include "gliocontrol/errors.hpp"
#include "gliocontrol/objective.hpp"
#include "gliocontrol/random.hpp"
#include "helpers.hpp"

using namespace gliocontrol;
using testing::coupled_params;
using testing::square;

namespace {

StateTrajectory constant_trajectory(const Grid& g, const TimeGrid& time, double r1, double r2, double v) {
  StateTrajectory t;
  t.time = time;
  t.rho1.assign(time.steps() + 1, Field(g, r1));
  t.rho2.assign(time.steps() + 1, Field(g, r2));
  t.v.assign(time.steps() + 1, Field(g, v));
  return t;
}

CustomObjective smooth_custom() {
  CustomObjective c;
  c.psi1 = [](const PointState& s) { return s.rho1 * s.rho1 + std::sin(s.v) * s.rho2; };
  c.psi2 = [](const PointState& s) { return s.rho1 * s.v + s.u * s.u * (1.0 + s.rho2); };
  c.grad_psi1 = [](const PointState& s) { return std::array<double, 3>{2.0 * s.rho1, std::sin(s.v), std::cos(s.v) * s.rho2}; };
  c.grad_psi2 = [](const PointState& s) {
    return std::array<double, 4>{s.v, s.u * s.u, s.rho1, 2.0 * s.u * (1.0 + s.rho2)};
  };
  return c;
}

}  // namespace

TEST_CASE("eval_J examples") {
  const Grid g = square(4);
  const TimeGrid time(1.0, 10);
  SUBCASE("terminal mass") {
    const Objective obj(TerminalMass{1.0, 0.0});
    CHECK(eval_J(constant_trajectory(g, time, 2.0, 5.0, 1.0), Control::constant(g, 10, 0.3, 1.0), obj) ==
          doctest::Approx(2.0));
  }
  SUBCASE("pure dose") {
    const Objective obj(TerminalMassPlusDose{0.0, 0.0, 2.0});
    CHECK(eval_J(constant_trajectory(g, time, 1.0, 1.0, 1.0), Control::constant(g, 10, 0.5, 1.0), obj) ==
          doctest::Approx(0.25));
  }
  SUBCASE("perfect tracking") {
    const Objective obj(ChronicTracking{Field(g, 0.7), 2.0});
    CHECK(eval_J(constant_trajectory(g, time, 0.7, 0.1, 0.1), Control::constant(g, 10, 0.0, 1.0), obj) == 0.0);
  }
  SUBCASE("shape mismatch") {
    const Objective obj(TerminalMass{});
    CHECK_THROWS_AS(eval_J(constant_trajectory(g, time, 1, 1, 1), Control::constant(g, 9, 0.0, 1.0), obj),
                    ConfigError);
  }
}

TEST_CASE("psi gradients of the named variants") {
  PointState s;
  s.rho1 = 3.0;
  s.u = 0.3;
  const PsiGradients m = Objective(TerminalMass{0.7, 0.2}).gradients(s);
  CHECK(m.d_rho1_psi1 == 0.7);
  CHECK(m.d_rho2_psi1 == 0.2);
  CHECK(m.d_v_psi1 == 0.0);
  CHECK(m.d_rho1_psi2 == 0.0);
  CHECK(m.d_u_psi2 == 0.0);

  const Grid g = square(4);
  const PsiGradients t = Objective(ChronicTracking{Field(g, 1.0), 3.0}).gradients(s);
  CHECK(t.d_rho1_psi1 == 4.0);
  CHECK(t.d_rho1_psi2 == 4.0);
  CHECK(t.d_u_psi2 == doctest::Approx(3.0 * 0.09));

  s.u = 0.0;
  CHECK(Objective(TerminalMassPlusDose{0, 0, 1.0}).gradients(s).d_u_psi2 == 1.0);
}

TEST_CASE("named gradients match central differences") {
  Rng rng(43);
  const Grid g = square(4);
  const Objective objs[] = {Objective(TerminalMass{0.7, 0.2}), Objective(TerminalMassPlusDose{0.5, 1.5, 2.5}),
                            Objective(ChronicTracking{rng.field(g, 0.0, 1.0), 1.5})};
  const double h = 1e-6;
  for (const Objective& obj : objs) {
    for (int k = 0; k < 10; ++k) {
      PointState s;
      s.rho1 = rng.uniform(0, 2), s.rho2 = rng.uniform(0, 2), s.v = rng.uniform(0, 2), s.u = rng.uniform(0.1, 1);
      s.cell = static_cast<std::size_t>(rng.uniform(0, 16));
      const PsiGradients gr = obj.gradients(s);
      auto fd = [&](double (Objective::*psi)(const PointState&) const, double PointState::*m) {
        PointState a = s, b = s;
        a.*m += h;
        b.*m -= h;
        return ((obj.*psi)(a) - (obj.*psi)(b)) / (2 * h);
      };
      auto close = [](double x, double y) { return std::abs(x - y) <= 1e-6 * std::max(1.0, std::abs(y)); };
      CHECK(close(gr.d_rho1_psi1, fd(&Objective::psi1, &PointState::rho1)));
      CHECK(close(gr.d_rho2_psi1, fd(&Objective::psi1, &PointState::rho2)));
      CHECK(close(gr.d_v_psi1, fd(&Objective::psi1, &PointState::v)));
      CHECK(close(gr.d_rho1_psi2, fd(&Objective::psi2, &PointState::rho1)));
      CHECK(close(gr.d_rho2_psi2, fd(&Objective::psi2, &PointState::rho2)));
      CHECK(close(gr.d_v_psi2, fd(&Objective::psi2, &PointState::v)));
      CHECK(close(gr.d_u_psi2, fd(&Objective::psi2, &PointState::u)));
    }
  }
}

TEST_CASE("objective validation") {
  CHECK_THROWS_AS(Objective(TerminalMass{-1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(Objective(TerminalMassPlusDose{1.0, 0.0, 0.5}), ConfigError);
  const Grid g = square(4);
  Field bad(g);
  bad[0] = INFINITY;
  CHECK_THROWS_AS(Objective(ChronicTracking{bad, 2.0}), ConfigError);
}

TEST_CASE("custom objective self-check") {
  CHECK_NOTHROW(Objective(smooth_custom()));
  CustomObjective wrong = smooth_custom();
  wrong.grad_psi2 = [](const PointState& s) { return std::array<double, 4>{s.v, s.u * s.u, s.rho1, s.u}; };
  CHECK_THROWS_WITH_AS(Objective{wrong}, doctest::Contains("d psi2 / d u"), ConfigError);
  CustomObjective missing;
  CHECK_THROWS_AS(Objective{missing}, ConfigError);
}

TEST_CASE("reduced functional") {
  const Grid g = square(6);
  const ModelParams p = coupled_params();
  const TimeGrid time(0.5, 50);
  const InitialData zero{Field(g), Field(g), Field(g)};
  CHECK(eval_reduced(Control::constant(g, 50, 0.0, 1.0), zero, p, time, Objective(TerminalMass{})) == 0.0);

  const InitialData init{Field(g, 0.3), Field(g, 0.1), Field(g, 0.2)};
  const Objective dose(TerminalMassPlusDose{0.0, 0.0, 2.0});
  const double f0 = eval_reduced(Control::constant(g, 50, 0.0, 1.0), init, p, time, dose);
  const double f1 = eval_reduced(Control::constant(g, 50, 0.2, 1.0), init, p, time, dose);
  const double f2 = eval_reduced(Control::constant(g, 50, 0.4, 1.0), init, p, time, dose);
  CHECK(f0 < f1);
  CHECK(f1 < f2);
  CHECK(eval_reduced(Control::constant(g, 50, 0.2, 1.0), init, p, time, dose) == f1);
}

TEST_CASE("pure dose cost is midpoint convex along segments") {
  Rng rng(47);
  const Grid g = square(6);
  const ModelParams p = coupled_params();
  const TimeGrid time(0.5, 50);
  const InitialData init{Field(g, 0.3), Field(g, 0.1), Field(g, 0.2)};
  const Objective dose(TerminalMassPlusDose{0.0, 0.0, 2.0});
  for (int k = 0; k < 5; ++k) {
    const FieldSeries a = rng.series(g, 50, 0.0, 1.0);
    const FieldSeries b = rng.series(g, 50, 0.0, 1.0);
    FieldSeries mid = a;
    for (std::size_t n = 0; n < mid.size(); ++n) {
      mid[n] *= 0.5;
      mid[n].axpy(0.5, b[n]);
    }
    const double fa = eval_reduced(Control(ControlMode::SpaceTime, 1.0, a), init, p, time, dose);
    const double fb = eval_reduced(Control(ControlMode::SpaceTime, 1.0, b), init, p, time, dose);
    const double fm = eval_reduced(Control(ControlMode::SpaceTime, 1.0, mid), init, p, time, dose);
    CHECK(fm <= 0.5 * (fa + fb) + 1e-10);
  }
}

TEST_CASE("J is nonnegative for the named variants") {
  Rng rng(53);
  const Grid g = square(6);
  const ModelParams p = coupled_params();
  const TimeGrid time(0.2, 20);
  const InitialData init{rng.field(g, 0, 1), rng.field(g, 0, 1), rng.field(g, 0, 1)};
  const Control u(ControlMode::SpaceTime, 1.0, rng.series(g, 20, 0.0, 1.0));
  const Objective objs[] = {Objective(TerminalMass{1, 1}), Objective(TerminalMassPlusDose{1, 0, 1.5}),
                            Objective(ChronicTracking{rng.field(g, 0, 1), 2.0})};
  for (const Objective& obj : objs) CHECK(eval_reduced(u, init, p, time, obj) >= 0.0);
}
