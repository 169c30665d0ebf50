#include "gliocontrol/run.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include <json.hpp>

#include "gliocontrol/adjoint.hpp"
#include "gliocontrol/errors.hpp"
#include "gliocontrol/random.hpp"
#include "gliocontrol/sensitivity.hpp"

namespace gliocontrol {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Wall-clock sections, written to timings.json only.
class Stopwatch {
 public:
  template <class F>
  auto time(const std::string& name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      Stopwatch* self;
      std::string name;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        self->seconds_[name] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
    } rec{this, name, start};
    return f();
  }

  json to_json() const {
    json j = json::object();
    for (const auto& [k, v] : seconds_) j[k] = v;
    return j;
  }

 private:
  std::map<std::string, double> seconds_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

template <class Writer>
void write_with(const fs::path& path, Writer&& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  w(os);
}

json masses(const State& s) {
  return json{{"rho1", integrate(s.rho1)}, {"rho2", integrate(s.rho2)}, {"v", integrate(s.v)}};
}

json bounds_json(const BoundsReport& rep) {
  json checks = json::array();
  for (const BoundCheck& c : rep.checks) {
    checks.push_back(json{{"name", c.name},
                          {"bound", c.bound},
                          {"max", c.max_value},
                          {"min", c.min_value},
                          {"slack", c.slack},
                          {"passed", c.passed}});
  }
  return json{{"passed", rep.passed}, {"checks", checks}};
}

json state_summary(const StateTrajectory& traj, const Objective& obj, const Control& ctrl, const InitialData& init,
                   const ModelParams& p, BoundsReport* bounds_out) {
  const BoundsReport bounds = verify_bounds(traj, init, p, ctrl.cap());
  if (bounds_out) *bounds_out = bounds;
  return json{{"J", eval_J(traj, ctrl, obj)},
              {"initial_mass", masses(traj.at(0))},
              {"final_mass", masses(traj.at(traj.steps()))},
              {"bounds", bounds_json(bounds)}};
}

struct Problem {
  Grid grid;
  TimeGrid time;
  InitialData init;
  Control control;
  Objective objective;
};

Problem materialize(const RunConfig& cfg) {
  Grid grid = make_grid(cfg.grid);
  TimeGrid time(cfg.t_final, cfg.steps);
  InitialData init = make_initial_data(cfg, grid);
  Control control = make_control(cfg, grid);
  Objective objective = make_objective(cfg, grid);
  return Problem{std::move(grid), time, std::move(init), std::move(control), std::move(objective)};
}

void write_state_artifacts(const fs::path& dir, const StateTrajectory& traj, int every) {
  write_with(dir / "timeseries.csv", [&](std::ostream& os) { write_timeseries_csv(os, traj); });
  write_trajectory_snapshots((dir / "snapshots").string(), traj, every);
}

RunOutcome run_simulate(const RunConfig& cfg, const Problem& pb, json& summary, Stopwatch& sw) {
  const StateTrajectory traj =
      sw.time("forward", [&] { return solve_forward(pb.init, pb.control, pb.time, cfg.params, cfg.solver); });
  summary["result"] = state_summary(traj, pb.objective, pb.control, pb.init, cfg.params, nullptr);
  sw.time("write", [&] {
    write_state_artifacts(cfg.output.directory, traj, cfg.output.snapshot_every);
    return 0;
  });
  return {};
}

RunOutcome run_verify(const RunConfig& cfg, const Problem& pb, json& summary, Stopwatch& sw) {
  const StateTrajectory traj =
      sw.time("forward", [&] { return solve_forward(pb.init, pb.control, pb.time, cfg.params, cfg.solver); });
  BoundsReport bounds;
  json result = state_summary(traj, pb.objective, pb.control, pb.init, cfg.params, &bounds);
  bool passed = bounds.passed;
  if (cfg.verify.picard) {
    const PicardResult pic = sw.time("picard", [&] {
      return solve_forward_picard(pb.init, pb.control, pb.time, cfg.params, cfg.verify.picard_max_iter,
                                  cfg.verify.picard_tol, cfg.solver);
    });
    const double dist = trajectory_distance(pic.trajectory.rho1, pic.trajectory.rho2, pic.trajectory.v, traj.rho1,
                                            traj.rho2, traj.v);
    result["picard"] = json{{"iterations", pic.iterations},
                            {"last_increment", pic.last_increment},
                            {"distance_to_imex", dist}};
  }
  result["passed"] = passed;
  summary["result"] = result;
  sw.time("write", [&] {
    write_state_artifacts(cfg.output.directory, traj, cfg.output.snapshot_every);
    return 0;
  });
  if (!passed) return {kExitVerification, "growth envelope or positivity check failed"};
  return {};
}

RunOutcome run_optimize(const RunConfig& cfg, const Problem& pb, json& summary, Stopwatch& sw) {
  const OcpResult res = sw.time("optimize", [&] {
    return solve_ocp(pb.init, cfg.params, pb.time, pb.objective, cfg.optimizer, pb.control, cfg.solver);
  });
  const auto& rec = res.history.records;
  const KktReport kkt = kkt_sign_report(res.control, res.gradient, cfg.optimizer.stationarity_tol);
  json result = state_summary(res.state, pb.objective, res.control, pb.init, cfg.params, nullptr);
  result["iterations"] = static_cast<int>(rec.size()) - 1;
  result["converged"] = res.converged;
  result["stalled"] = res.stalled;
  result["f_initial"] = rec.front().f;
  result["f_final"] = rec.back().f;
  result["residual_initial"] = rec.front().residual;
  result["residual_final"] = rec.back().residual;
  double u_max = 0.0;
  for (const Field& f : res.control.slices()) u_max = std::max(u_max, norm_linf(f));
  result["control_linf"] = u_max;
  result["kkt"] = json{{"violations", kkt.violations},
                       {"exempt", kkt.exempt},
                       {"total", kkt.total},
                       {"violation_fraction", kkt.violation_fraction}};
  summary["result"] = result;
  sw.time("write", [&] {
    const fs::path dir = cfg.output.directory;
    write_with(dir / "history.csv", [&](std::ostream& os) { write_csv(os, res.history); });
    write_state_artifacts(dir, res.state, cfg.output.snapshot_every);
    write_snapshot_series((dir / "snapshots" / "control").string(), res.control.slices());
    write_snapshot_series((dir / "snapshots" / "gradient").string(), res.gradient);
    return 0;
  });
  return {};
}

RunOutcome run_gradcheck(const RunConfig& cfg, const Problem& pb, json& summary, Stopwatch& sw) {
  const GradcheckSpec& gc = cfg.gradcheck;
  Rng rng(cfg.seed);
  const double amp = gc.direction_amplitude * cfg.params.u_cap;
  const bool time_only = pb.control.mode() == ControlMode::TimeOnly;
  std::vector<FieldSeries> directions;
  for (int k = 0; k < gc.directions; ++k) {
    directions.push_back(rng.series(pb.grid, pb.time.steps(), -amp, amp, time_only));
  }
  if (directions.empty()) throw ConfigError("gradcheck.directions must be >= 1");

  const ConvergenceReport conv = sw.time("linearization", [&] {
    return directional_derivative_check(pb.init, pb.control, directions.front(), gc.lambdas, pb.time, cfg.params,
                                        cfg.solver);
  });
  const DualityReport dual = sw.time("duality", [&] {
    const StateTrajectory base = solve_forward(pb.init, pb.control, pb.time, cfg.params, cfg.solver);
    const TangentTrajectory tan =
        solve_linearized(linearize_coeffs(base, cfg.params), directions.front(), cfg.params, cfg.solver);
    const AdjointTrajectory adj = solve_adjoint(base, pb.control, pb.objective, cfg.params, cfg.solver);
    return duality_check(tan, adj, directions.front(), pb.objective, base, pb.control);
  });
  const GradientCheckReport grad = sw.time("gradient", [&] {
    return gradient_check(pb.init, pb.control, pb.objective, cfg.params, pb.time, directions, gc.fd_epsilon,
                          cfg.solver);
  });

  bool ratios_ok = true;
  json rows = json::array();
  for (std::size_t k = 0; k < conv.rows.size(); ++k) {
    const ConvergenceRow& r = conv.rows[k];
    if (k > 0 && !r.at_floor && !(r.ratio >= kFirstOrderRatioMin && r.ratio <= kFirstOrderRatioMax)) {
      ratios_ok = false;
    }
    rows.push_back(json{{"lambda", r.lambda}, {"error", r.error}, {"ratio", r.ratio}, {"at_floor", r.at_floor}});
  }
  const bool gradient_ok = grad.cosine >= kGradcheckCosineMin && grad.relative_error <= kGradcheckRelErrMax;
  const bool duality_ok = dual.residual <= kDualityResidualMax;
  const bool passed = ratios_ok && gradient_ok && duality_ok;

  summary["result"] = json{
      {"linearization", json{{"tangent_norm", conv.tangent_norm}, {"rows", rows}, {"passed", ratios_ok}}},
      {"duality", json{{"lhs", dual.lhs}, {"rhs", dual.rhs}, {"residual", dual.residual}, {"passed", duality_ok}}},
      {"gradient",
       json{{"cosine", grad.cosine}, {"relative_error", grad.relative_error}, {"passed", gradient_ok}}},
      {"passed", passed}};
  sw.time("write", [&] {
    const fs::path dir = cfg.output.directory;
    write_with(dir / "convergence.csv", [&](std::ostream& os) { write_csv(os, conv); });
    write_with(dir / "gradcheck.csv", [&](std::ostream& os) { write_csv(os, grad); });
    return 0;
  });
  if (!passed) return {kExitVerification, "gradient check failed"};
  return {};
}

}  // namespace

RunOutcome run(const RunConfig& cfg) {
  Stopwatch sw;
  json summary;
  summary["mode"] = to_string(cfg.mode);
  summary["seed"] = cfg.seed;
  RunOutcome out;
  try {
    const fs::path dir = cfg.output.directory;
    fs::create_directories(dir);
    write_text(dir / "config.frozen.json", to_json_text(cfg));
    const Problem pb = materialize(cfg);
    summary["grid"] = json{{"dim", pb.grid.dim()}, {"cells", pb.grid.size()}};
    summary["time"] = json{{"t_final", cfg.t_final}, {"steps", cfg.steps}, {"dt", pb.time.dt()}};
    switch (cfg.mode) {
      case RunMode::Simulate: out = run_simulate(cfg, pb, summary, sw); break;
      case RunMode::Verify: out = run_verify(cfg, pb, summary, sw); break;
      case RunMode::Optimize: out = run_optimize(cfg, pb, summary, sw); break;
      case RunMode::Gradcheck: out = run_gradcheck(cfg, pb, summary, sw); break;
    }
  } catch (const ConfigError& e) {
    out = {kExitConfig, e.what()};
  } catch (const SolverError& e) {
    out = {kExitSolver, e.what()};
  } catch (const IterationError& e) {
    out = {kExitSolver, e.what()};
  } catch (const std::exception& e) {
    out = {kExitSolver, e.what()};
  }
  summary["exit_code"] = out.exit_code;
  if (!out.message.empty()) summary["message"] = out.message;
  try {
    const fs::path dir = cfg.output.directory;
    fs::create_directories(dir);
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    write_text(dir / "timings.json", sw.to_json().dump(2) + "\n");
  } catch (const std::exception& e) {
    if (out.exit_code == kExitOk) out = {kExitSolver, e.what()};
  }
  return out;
}

}  // namespace gliocontrol
