#include "gliocontrol/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gliocontrol/errors.hpp"

namespace gliocontrol {

using nlohmann::json;

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Simulate: return "simulate";
    case RunMode::Optimize: return "optimize";
    case RunMode::Gradcheck: return "gradcheck";
    case RunMode::Verify: return "verify";
  }
  return "simulate";
}

RunMode run_mode_from_string(const std::string& name) {
  if (name == "simulate") return RunMode::Simulate;
  if (name == "optimize") return RunMode::Optimize;
  if (name == "gradcheck") return RunMode::Gradcheck;
  if (name == "verify") return RunMode::Verify;
  throw ConfigError("mode: unknown mode '" + name + "'");
}

namespace {

// Reads keys of one JSON object and rejects whatever was not read.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    seen_.insert(key);
    if (!obj_.contains(key)) return fallback;
    return convert<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw ConfigError(name(key) + ": required key missing");
    return convert<T>(key);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) return Section(empty(), name(key));
    return Section(obj_.at(key), name(key));
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError(name(key) + ": unknown key");
    }
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }

  template <class T>
  T convert(const std::string& key) const {
    try {
      return obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(name(key) + ": wrong type");
    }
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void positive(double x, const std::string& key) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(key + ": must be positive");
}

void nonnegative(double x, const std::string& key) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError(key + ": must be nonnegative");
}

std::string resolve(const std::string& p, const std::filesystem::path& base_dir) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base_dir / path;
  return path.lexically_normal().string();
}

FieldSpec parse_field(Section s, const std::filesystem::path& base_dir, int dim) {
  FieldSpec f;
  const std::string type = s.require<std::string>("type");
  if (type == "constant") {
    f.kind = FieldSpec::Kind::Constant;
    f.value = s.require<double>("value");
    if (!std::isfinite(f.value)) throw ConfigError(s.name("value") + ": must be finite");
  } else if (type == "gaussian") {
    f.kind = FieldSpec::Kind::Gaussian;
    f.center = s.require<std::vector<double>>("center");
    f.width = s.require<double>("width");
    f.amplitude = s.require<double>("amplitude");
    if (static_cast<int>(f.center.size()) != dim) throw ConfigError(s.name("center") + ": needs dim entries");
    positive(f.width, s.name("width"));
    if (!std::isfinite(f.amplitude)) throw ConfigError(s.name("amplitude") + ": must be finite");
  } else if (type == "file") {
    f.kind = FieldSpec::Kind::File;
    f.path = resolve(s.require<std::string>("path"), base_dir);
    if (!std::filesystem::exists(f.path + ".hdr") || !std::filesystem::exists(f.path + ".bin")) {
      throw ConfigError(s.name("path") + ": snapshot '" + f.path + "' (.hdr/.bin) not found");
    }
  } else {
    throw ConfigError(s.name("type") + ": unknown field type '" + type + "'");
  }
  s.finish();
  return f;
}

json field_to_json(const FieldSpec& f) {
  switch (f.kind) {
    case FieldSpec::Kind::Constant: return {{"type", "constant"}, {"value", f.value}};
    case FieldSpec::Kind::Gaussian:
      return {{"type", "gaussian"}, {"center", f.center}, {"width", f.width}, {"amplitude", f.amplitude}};
    case FieldSpec::Kind::File: return {{"type", "file"}, {"path", f.path}};
  }
  return {};
}

ControlMode control_mode_from_string(const std::string& s, const std::string& key) {
  if (s == "space_time") return ControlMode::SpaceTime;
  if (s == "time_only") return ControlMode::TimeOnly;
  throw ConfigError(key + ": expected 'space_time' or 'time_only'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  Section top(root, "");
  RunConfig cfg;

  cfg.mode = run_mode_from_string(top.get<std::string>("mode", "simulate"));

  {
    Section s = top.child("grid");
    cfg.grid.dim = s.get<int>("dim", cfg.grid.dim);
    const std::vector<double> default_ext(cfg.grid.dim, 1.0);
    const std::vector<int> default_cells(cfg.grid.dim, 16);
    cfg.grid.extents = s.get<std::vector<double>>("extents", default_ext);
    cfg.grid.cells = s.get<std::vector<int>>("cells", default_cells);
    s.finish();
    make_grid(cfg.grid);  // validates
  }
  {
    Section s = top.child("time");
    cfg.t_final = s.get<double>("t_final", cfg.t_final);
    cfg.steps = s.get<int>("steps", cfg.steps);
    s.finish();
    positive(cfg.t_final, "time.t_final");
    if (cfg.steps < 1) throw ConfigError("time.steps: must be >= 1");
  }
  {
    Section s = top.child("params");
    ModelParams& p = cfg.params;
    p.alpha = s.require<double>("alpha");
    p.beta = s.require<double>("beta");
    p.delta1 = s.require<double>("delta1");
    p.delta2 = s.require<double>("delta2");
    p.delta_v = s.require<double>("delta_v");
    p.b = s.require<double>("b");
    p.B = s.require<double>("B");
    p.u_cap = s.require<double>("u_cap");
    s.finish();
    p.validate();
  }
  {
    Section s = top.child("initial");
    auto field_or_zero = [&](const char* key) {
      return s.has(key) ? parse_field(s.child(key), base_dir, cfg.grid.dim) : FieldSpec{};
    };
    cfg.rho1 = field_or_zero("rho1");
    cfg.rho2 = field_or_zero("rho2");
    cfg.v = field_or_zero("v");
    s.finish();
    for (const auto* f : {&cfg.rho1, &cfg.rho2, &cfg.v}) {
      if (f->kind == FieldSpec::Kind::Constant) nonnegative(f->value, "initial: constant value");
      if (f->kind == FieldSpec::Kind::Gaussian) nonnegative(f->amplitude, "initial: gaussian amplitude");
    }
  }
  {
    Section s = top.child("control");
    const std::string type = s.get<std::string>("type", "zero");
    cfg.control.mode = control_mode_from_string(s.get<std::string>("mode", "space_time"), s.name("mode"));
    if (type == "zero") {
      cfg.control.kind = ControlSpec::Kind::Zero;
    } else if (type == "constant") {
      cfg.control.kind = ControlSpec::Kind::Constant;
      cfg.control.value = s.require<double>("value");
      if (!(cfg.control.value >= 0.0 && cfg.control.value <= cfg.params.u_cap)) {
        throw ConfigError("control.value: must lie in [0, params.u_cap]");
      }
    } else if (type == "file") {
      cfg.control.kind = ControlSpec::Kind::File;
      cfg.control.path = resolve(s.require<std::string>("path"), base_dir);
      if (!std::filesystem::exists(cfg.control.path + ".hdr")) {
        throw ConfigError("control.path: snapshot '" + cfg.control.path + "' not found");
      }
    } else {
      throw ConfigError("control.type: unknown control type '" + type + "'");
    }
    s.finish();
  }
  {
    Section s = top.child("objective");
    const std::string type = s.get<std::string>("type", "terminal_mass");
    ObjectiveSpec& o = cfg.objective;
    if (type == "terminal_mass") {
      o.kind = ObjectiveSpec::Kind::TerminalMass;
    } else if (type == "terminal_mass_dose") {
      o.kind = ObjectiveSpec::Kind::TerminalMassPlusDose;
    } else if (type == "chronic_tracking") {
      o.kind = ObjectiveSpec::Kind::ChronicTracking;
    } else {
      throw ConfigError("objective.type: unknown objective '" + type + "'");
    }
    if (o.kind != ObjectiveSpec::Kind::ChronicTracking) {
      o.gamma1 = s.get<double>("gamma1", o.gamma1);
      o.gamma2 = s.get<double>("gamma2", o.gamma2);
      nonnegative(o.gamma1, "objective.gamma1");
      nonnegative(o.gamma2, "objective.gamma2");
    }
    if (o.kind != ObjectiveSpec::Kind::TerminalMass) {
      o.p = s.get<double>("p", o.p);
      if (!(o.p >= 1.0)) throw ConfigError("objective.p: must be >= 1");
    }
    if (o.kind == ObjectiveSpec::Kind::ChronicTracking) {
      o.target = parse_field(s.child("target"), base_dir, cfg.grid.dim);
    }
    s.finish();
  }
  {
    Section s = top.child("optimizer");
    OptimizerOptions& o = cfg.optimizer;
    o.max_outer_iterations = s.get<int>("max_outer_iterations", o.max_outer_iterations);
    o.armijo_c = s.get<double>("armijo_c", o.armijo_c);
    o.backtrack_factor = s.get<double>("backtrack_factor", o.backtrack_factor);
    o.initial_step = s.get<double>("initial_step", o.initial_step);
    o.stationarity_tol = s.get<double>("stationarity_tol", o.stationarity_tol);
    o.max_backtracks = s.get<int>("max_backtracks", o.max_backtracks);
    s.finish();
    o.validate();
  }
  {
    Section s = top.child("solver");
    cfg.solver.tolerance = s.get<double>("tolerance", cfg.solver.tolerance);
    cfg.solver.max_iterations = s.get<int>("max_iterations", cfg.solver.max_iterations);
    s.finish();
    if (!(cfg.solver.tolerance > 0.0 && cfg.solver.tolerance < 1.0)) {
      throw ConfigError("solver.tolerance: must be in (0, 1)");
    }
    if (cfg.solver.max_iterations < 0) throw ConfigError("solver.max_iterations: must be >= 0");
  }
  {
    Section s = top.child("gradcheck");
    GradcheckSpec& g = cfg.gradcheck;
    g.lambdas = s.get<std::vector<double>>("lambdas", g.lambdas);
    g.directions = s.get<int>("directions", g.directions);
    g.fd_epsilon = s.get<double>("fd_epsilon", g.fd_epsilon);
    g.direction_amplitude = s.get<double>("direction_amplitude", g.direction_amplitude);
    s.finish();
    if (g.lambdas.empty()) throw ConfigError("gradcheck.lambdas: must not be empty");
    for (double l : g.lambdas) positive(l, "gradcheck.lambdas");
    if (g.directions < 1) throw ConfigError("gradcheck.directions: must be >= 1");
    positive(g.fd_epsilon, "gradcheck.fd_epsilon");
    positive(g.direction_amplitude, "gradcheck.direction_amplitude");
  }
  {
    Section s = top.child("verify");
    cfg.verify.picard = s.get<bool>("picard", cfg.verify.picard);
    cfg.verify.picard_max_iter = s.get<int>("picard_max_iter", cfg.verify.picard_max_iter);
    cfg.verify.picard_tol = s.get<double>("picard_tol", cfg.verify.picard_tol);
    s.finish();
    if (cfg.verify.picard_max_iter < 1) throw ConfigError("verify.picard_max_iter: must be >= 1");
    positive(cfg.verify.picard_tol, "verify.picard_tol");
  }
  {
    Section s = top.child("output");
    cfg.output.directory = resolve(s.get<std::string>("directory", cfg.output.directory), base_dir);
    cfg.output.snapshot_every = s.get<int>("snapshot_every", cfg.output.snapshot_every);
    s.finish();
    if (cfg.output.snapshot_every < 0) throw ConfigError("output.snapshot_every: must be >= 0");
  }
  cfg.seed = top.get<std::uint64_t>("seed", cfg.seed);
  top.finish();
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::filesystem::absolute(path).parent_path());
}

std::string to_json_text(const RunConfig& cfg) {
  json j;
  j["mode"] = to_string(cfg.mode);
  j["grid"] = {{"dim", cfg.grid.dim}, {"extents", cfg.grid.extents}, {"cells", cfg.grid.cells}};
  j["time"] = {{"t_final", cfg.t_final}, {"steps", cfg.steps}};
  const ModelParams& p = cfg.params;
  j["params"] = {{"alpha", p.alpha}, {"beta", p.beta}, {"delta1", p.delta1}, {"delta2", p.delta2},
                 {"delta_v", p.delta_v}, {"b", p.b}, {"B", p.B}, {"u_cap", p.u_cap}};
  j["initial"] = {{"rho1", field_to_json(cfg.rho1)}, {"rho2", field_to_json(cfg.rho2)}, {"v", field_to_json(cfg.v)}};

  json c;
  c["mode"] = cfg.control.mode == ControlMode::TimeOnly ? "time_only" : "space_time";
  switch (cfg.control.kind) {
    case ControlSpec::Kind::Zero: c["type"] = "zero"; break;
    case ControlSpec::Kind::Constant:
      c["type"] = "constant";
      c["value"] = cfg.control.value;
      break;
    case ControlSpec::Kind::File:
      c["type"] = "file";
      c["path"] = cfg.control.path;
      break;
  }
  j["control"] = c;

  json o;
  switch (cfg.objective.kind) {
    case ObjectiveSpec::Kind::TerminalMass:
      o = {{"type", "terminal_mass"}, {"gamma1", cfg.objective.gamma1}, {"gamma2", cfg.objective.gamma2}};
      break;
    case ObjectiveSpec::Kind::TerminalMassPlusDose:
      o = {{"type", "terminal_mass_dose"},
           {"gamma1", cfg.objective.gamma1},
           {"gamma2", cfg.objective.gamma2},
           {"p", cfg.objective.p}};
      break;
    case ObjectiveSpec::Kind::ChronicTracking:
      o = {{"type", "chronic_tracking"}, {"p", cfg.objective.p}, {"target", field_to_json(cfg.objective.target)}};
      break;
  }
  j["objective"] = o;

  const OptimizerOptions& op = cfg.optimizer;
  j["optimizer"] = {{"max_outer_iterations", op.max_outer_iterations},
                    {"armijo_c", op.armijo_c},
                    {"backtrack_factor", op.backtrack_factor},
                    {"initial_step", op.initial_step},
                    {"stationarity_tol", op.stationarity_tol},
                    {"max_backtracks", op.max_backtracks}};
  j["solver"] = {{"tolerance", cfg.solver.tolerance}, {"max_iterations", cfg.solver.max_iterations}};
  j["gradcheck"] = {{"lambdas", cfg.gradcheck.lambdas},
                    {"directions", cfg.gradcheck.directions},
                    {"fd_epsilon", cfg.gradcheck.fd_epsilon},
                    {"direction_amplitude", cfg.gradcheck.direction_amplitude}};
  j["verify"] = {{"picard", cfg.verify.picard},
                 {"picard_max_iter", cfg.verify.picard_max_iter},
                 {"picard_tol", cfg.verify.picard_tol}};
  j["output"] = {{"directory", cfg.output.directory}, {"snapshot_every", cfg.output.snapshot_every}};
  j["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

Grid make_grid(const GridSpec& spec) { return Grid::build(spec.dim, spec.extents, spec.cells); }

Field make_field(const FieldSpec& spec, const Grid& grid, const char* what) {
  switch (spec.kind) {
    case FieldSpec::Kind::Constant: return Field(grid, spec.value);
    case FieldSpec::Kind::Gaussian:
      return Field::from_function(grid, [&](const std::array<double, 2>& x) {
        double r2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) r2 += (x[a] - spec.center[a]) * (x[a] - spec.center[a]);
        return spec.amplitude * std::exp(-r2 / (2.0 * spec.width * spec.width));
      });
    case FieldSpec::Kind::File: {
      Field f = read_snapshot(spec.path);
      if (!(f.grid() == grid)) throw ConfigError(std::string(what) + ": snapshot grid does not match the run grid");
      return f;
    }
  }
  return Field(grid);
}

InitialData make_initial_data(const RunConfig& cfg, const Grid& grid) {
  InitialData init{make_field(cfg.rho1, grid, "initial.rho1"), make_field(cfg.rho2, grid, "initial.rho2"),
                   make_field(cfg.v, grid, "initial.v")};
  init.validate();
  return init;
}

Control make_control(const RunConfig& cfg, const Grid& grid) {
  const double cap = cfg.params.u_cap;
  switch (cfg.control.kind) {
    case ControlSpec::Kind::Zero: return Control::constant(grid, cfg.steps, 0.0, cap, cfg.control.mode);
    case ControlSpec::Kind::Constant:
      return Control::constant(grid, cfg.steps, cfg.control.value, cap, cfg.control.mode);
    case ControlSpec::Kind::File: {
      FieldSeries slices = read_snapshot_series(cfg.control.path);
      if (static_cast<int>(slices.size()) != cfg.steps) {
        throw ConfigError("control.path: snapshot has " + std::to_string(slices.size()) + " slices, expected " +
                          std::to_string(cfg.steps));
      }
      if (!(slices.front().grid() == grid)) throw ConfigError("control.path: snapshot grid does not match");
      Control c(cfg.control.mode, cap, std::move(slices));
      c.validate();
      return c;
    }
  }
  return Control::constant(grid, cfg.steps, 0.0, cap, cfg.control.mode);
}

Objective make_objective(const RunConfig& cfg, const Grid& grid) {
  const ObjectiveSpec& o = cfg.objective;
  switch (o.kind) {
    case ObjectiveSpec::Kind::TerminalMass: return Objective(TerminalMass{o.gamma1, o.gamma2});
    case ObjectiveSpec::Kind::TerminalMassPlusDose: return Objective(TerminalMassPlusDose{o.gamma1, o.gamma2, o.p});
    case ObjectiveSpec::Kind::ChronicTracking:
      return Objective(ChronicTracking{make_field(o.target, grid, "objective.target"), o.p});
  }
  return Objective(TerminalMass{});
}

}  // namespace gliocontrol
