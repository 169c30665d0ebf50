#include "gliocontrol/objective.hpp"

#include <cmath>
#include <string>

#include "gliocontrol/errors.hpp"
#include "gliocontrol/random.hpp"

namespace gliocontrol {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_weight(double g, const char* name) {
  if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError(std::string("objective: ") + name + " must be >= 0");
}

void check_power(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("objective: p must be >= 1, got " + std::to_string(p));
}

double dose(double u, double p) { return std::pow(u, p); }
double dose_derivative(double u, double p) { return p * std::pow(u, p - 1.0); }

void self_check(const CustomObjective& c, std::uint64_t seed) {
  if (!c.psi1 || !c.psi2 || !c.grad_psi1 || !c.grad_psi2) {
    throw ConfigError("objective: custom objective needs psi1, psi2 and both gradients");
  }
  Rng rng(seed);
  constexpr double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    PointState s;
    s.rho1 = rng.uniform(0.0, 2.0);
    s.rho2 = rng.uniform(0.0, 2.0);
    s.v = rng.uniform(0.0, 2.0);
    s.u = rng.uniform(0.1, 1.0);
    s.x = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};

    auto probe = [&](const std::function<double(const PointState&)>& fn, double PointState::*member) {
      PointState plus = s;
      PointState minus = s;
      plus.*member += h;
      minus.*member -= h;
      return (fn(plus) - fn(minus)) / (2.0 * h);
    };
    auto compare = [&](double analytic, double fd, const char* what) {
      const double err = std::abs(analytic - fd);
      if (!(err <= kCustomGradientTol * std::max(1.0, std::abs(fd)))) {
        throw ConfigError(std::string("objective: custom gradient ") + what +
                          " disagrees with finite differences (error " + std::to_string(err) + ")");
      }
    };
    const auto g1 = c.grad_psi1(s);
    compare(g1[0], probe(c.psi1, &PointState::rho1), "d psi1 / d rho1");
    compare(g1[1], probe(c.psi1, &PointState::rho2), "d psi1 / d rho2");
    compare(g1[2], probe(c.psi1, &PointState::v), "d psi1 / d v");
    const auto g2 = c.grad_psi2(s);
    compare(g2[0], probe(c.psi2, &PointState::rho1), "d psi2 / d rho1");
    compare(g2[1], probe(c.psi2, &PointState::rho2), "d psi2 / d rho2");
    compare(g2[2], probe(c.psi2, &PointState::v), "d psi2 / d v");
    compare(g2[3], probe(c.psi2, &PointState::u), "d psi2 / d u");
  }
}

}  // namespace

Objective::Objective(Variant v, std::uint64_t self_check_seed) : variant_(std::move(v)) {
  std::visit(overloaded{
                 [](const TerminalMass& o) {
                   check_weight(o.gamma1, "gamma1");
                   check_weight(o.gamma2, "gamma2");
                 },
                 [](const TerminalMassPlusDose& o) {
                   check_weight(o.gamma1, "gamma1");
                   check_weight(o.gamma2, "gamma2");
                   check_power(o.p);
                 },
                 [](const ChronicTracking& o) {
                   check_power(o.p);
                   if (o.target.size() == 0 || !o.target.all_finite()) {
                     throw ConfigError("objective: tracking target must be a finite field");
                   }
                 },
                 [&](const CustomObjective& o) { self_check(o, self_check_seed); },
             },
             variant_);
}

double Objective::psi1(const PointState& s) const {
  return std::visit(overloaded{
                        [&](const TerminalMass& o) { return o.gamma1 * s.rho1 + o.gamma2 * s.rho2; },
                        [&](const TerminalMassPlusDose& o) { return o.gamma1 * s.rho1 + o.gamma2 * s.rho2; },
                        [&](const ChronicTracking& o) {
                          const double d = s.rho1 - o.target[s.cell];
                          return d * d;
                        },
                        [&](const CustomObjective& o) { return o.psi1(s); },
                    },
                    variant_);
}

double Objective::psi2(const PointState& s) const {
  return std::visit(overloaded{
                        [&](const TerminalMass&) { return 0.0; },
                        [&](const TerminalMassPlusDose& o) { return dose(s.u, o.p); },
                        [&](const ChronicTracking& o) {
                          const double d = s.rho1 - o.target[s.cell];
                          return d * d + dose(s.u, o.p);
                        },
                        [&](const CustomObjective& o) { return o.psi2(s); },
                    },
                    variant_);
}

PsiGradients Objective::gradients(const PointState& s) const {
  return std::visit(overloaded{
                        [&](const TerminalMass& o) {
                          PsiGradients g;
                          g.d_rho1_psi1 = o.gamma1;
                          g.d_rho2_psi1 = o.gamma2;
                          return g;
                        },
                        [&](const TerminalMassPlusDose& o) {
                          PsiGradients g;
                          g.d_rho1_psi1 = o.gamma1;
                          g.d_rho2_psi1 = o.gamma2;
                          g.d_u_psi2 = dose_derivative(s.u, o.p);
                          return g;
                        },
                        [&](const ChronicTracking& o) {
                          PsiGradients g;
                          const double d = 2.0 * (s.rho1 - o.target[s.cell]);
                          g.d_rho1_psi1 = d;
                          g.d_rho1_psi2 = d;
                          g.d_u_psi2 = dose_derivative(s.u, o.p);
                          return g;
                        },
                        [&](const CustomObjective& o) {
                          const auto g1 = o.grad_psi1(s);
                          const auto g2 = o.grad_psi2(s);
                          return PsiGradients{g1[0], g1[1], g1[2], g2[0], g2[1], g2[2], g2[3]};
                        },
                    },
                    variant_);
}

bool Objective::running_cost_state_free() const {
  return std::holds_alternative<TerminalMass>(variant_) || std::holds_alternative<TerminalMassPlusDose>(variant_);
}

PointState point_at(const StateTrajectory& traj, const Control* ctrl, int n, std::size_t i) {
  PointState s;
  s.rho1 = traj.rho1[n][i];
  s.rho2 = traj.rho2[n][i];
  s.v = traj.v[n][i];
  s.u = (ctrl && n < ctrl->steps()) ? ctrl->slice(n)[i] : 0.0;
  s.x = traj.grid().center(i);
  s.cell = i;
  return s;
}

double eval_J(const StateTrajectory& traj, const Control& ctrl, const Objective& obj) {
  if (ctrl.steps() != traj.steps()) throw ConfigError("eval_J: control and trajectory step counts differ");
  require_same_grid(traj.grid(), ctrl.grid(), "eval_J");
  if (const auto* t = std::get_if<ChronicTracking>(&obj.variant())) {
    require_same_grid(traj.grid(), t->target.grid(), "eval_J tracking target");
  }
  const std::size_t cells = traj.grid().size();
  const double vol = traj.grid().cell_volume();
  const int n_t = traj.steps();

  double terminal = 0.0;
  for (std::size_t i = 0; i < cells; ++i) terminal += obj.psi1(point_at(traj, nullptr, n_t, i));
  double running = 0.0;
  for (int n = 0; n < n_t; ++n) {
    double slice = 0.0;
    for (std::size_t i = 0; i < cells; ++i) slice += obj.psi2(point_at(traj, &ctrl, n, i));
    running += slice;
  }
  return vol * terminal + traj.time.dt() * vol * running;
}

double eval_reduced(const Control& u, const InitialData& init, const ModelParams& p, const TimeGrid& time,
                    const Objective& obj, const LinearSolveOptions& opts) {
  return eval_J(solve_forward(init, u, time, p, opts), u, obj);
}

}  // namespace gliocontrol
