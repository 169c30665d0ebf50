#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <variant>

#include "gliocontrol/fields.hpp"
#include "gliocontrol/model.hpp"

namespace gliocontrol {

/// Pointwise arguments of the cost integrands.
struct PointState {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double v = 0.0;
  double u = 0.0;
  std::array<double, 2> x{};  ///< cell center
  std::size_t cell = 0;
};

/// All first partials of the terminal integrand psi1(rho1, rho2, v) and the
/// running integrand psi2(rho1, rho2, v, u).
struct PsiGradients {
  double d_rho1_psi1 = 0.0;
  double d_rho2_psi1 = 0.0;
  double d_v_psi1 = 0.0;
  double d_rho1_psi2 = 0.0;
  double d_rho2_psi2 = 0.0;
  double d_v_psi2 = 0.0;
  double d_u_psi2 = 0.0;
};

/// psi1 = g1 rho1 + g2 rho2, psi2 = 0.
struct TerminalMass {
  double gamma1 = 1.0;
  double gamma2 = 0.0;
};

/// psi1 = g1 rho1 + g2 rho2, psi2 = u^p.
struct TerminalMassPlusDose {
  double gamma1 = 1.0;
  double gamma2 = 0.0;
  double p = 2.0;
};

/// psi1 = (rho1 - target)^2, psi2 = (rho1 - target)^2 + u^p.
struct ChronicTracking {
  Field target;
  double p = 2.0;
};

/// User-supplied integrands. Gradients are verified against central
/// differences once, at construction.
struct CustomObjective {
  std::function<double(const PointState&)> psi1;
  std::function<double(const PointState&)> psi2;
  std::function<std::array<double, 3>(const PointState&)> grad_psi1;  ///< d/d(rho1, rho2, v)
  std::function<std::array<double, 4>(const PointState&)> grad_psi2;  ///< d/d(rho1, rho2, v, u)
};

inline constexpr double kCustomGradientTol = 1e-5;

class Objective {
 public:
  using Variant = std::variant<TerminalMass, TerminalMassPlusDose, ChronicTracking, CustomObjective>;

  /// Throws ConfigError for negative weights, p < 1, a non-finite target,
  /// or a custom gradient that fails the finite-difference self-check.
  explicit Objective(Variant v, std::uint64_t self_check_seed = 0x5eed);

  const Variant& variant() const { return variant_; }

  double psi1(const PointState& s) const;
  double psi2(const PointState& s) const;
  PsiGradients gradients(const PointState& s) const;

  /// True when psi2 does not depend on the state.
  bool running_cost_state_free() const;

 private:
  Variant variant_;
};

/// Terminal integral of psi1 plus the left-endpoint space-time integral of psi2.
double eval_J(const StateTrajectory& traj, const Control& ctrl, const Objective& obj);

/// f(u) = J(G(u), u).
double eval_reduced(const Control& u, const InitialData& init, const ModelParams& p, const TimeGrid& time,
                    const Objective& obj, const LinearSolveOptions& opts = {});

/// Builds the pointwise arguments at (step n, cell i); u is 0 at the final step.
PointState point_at(const StateTrajectory& traj, const Control* ctrl, int n, std::size_t i);

}  // namespace gliocontrol
