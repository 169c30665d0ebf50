#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gliocontrol/adjoint.hpp"
#include "gliocontrol/config.hpp"
#include "gliocontrol/errors.hpp"
#include "gliocontrol/optimizer.hpp"
#include "gliocontrol/run.hpp"

namespace py = pybind11;
using namespace gliocontrol;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<py::ssize_t> field_shape(const Grid& g) {
  std::vector<py::ssize_t> shape;
  for (int a = 0; a < g.dim(); ++a) shape.push_back(g.cells(a));
  return shape;
}

Field to_field(const Grid& g, const Array& a, const char* what) {
  if (static_cast<std::size_t>(a.size()) != g.size()) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(g.size()) + " values");
  }
  return Field(g, std::vector<double>(a.data(), a.data() + a.size()));
}

/// Accepts a scalar, one field, or a (steps, ...) stack.
FieldSeries to_series(const Grid& g, int steps, const Array& a, const char* what) {
  const auto n = static_cast<std::size_t>(a.size());
  if (n == 1) return FieldSeries(steps, Field(g, *a.data()));
  if (n == g.size()) return FieldSeries(steps, to_field(g, a, what));
  if (n != g.size() * static_cast<std::size_t>(steps)) {
    throw ConfigError(std::string(what) + ": expected a scalar, one field or steps fields");
  }
  FieldSeries out;
  for (int k = 0; k < steps; ++k) {
    const double* p = a.data() + static_cast<std::size_t>(k) * g.size();
    out.emplace_back(g, std::vector<double>(p, p + g.size()));
  }
  return out;
}

py::array_t<double> to_array(const Field& f) {
  py::array_t<double> out(field_shape(f.grid()));
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

py::array_t<double> to_array(const FieldSeries& s) {
  std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(s.size())};
  const auto tail = field_shape(s.front().grid());
  shape.insert(shape.end(), tail.begin(), tail.end());
  py::array_t<double> out(shape);
  double* p = out.mutable_data();
  for (const Field& f : s) p = std::copy(f.values().begin(), f.values().end(), p);
  return out;
}

struct Problem {
  Grid grid;
  ModelParams params;
  TimeGrid time;
  InitialData init;
  LinearSolveOptions solver;

  Control control(const Array& u, ControlMode mode) const {
    return Control(mode, params.u_cap, to_series(grid, time.steps(), u, "control"));
  }
};

Problem make_problem(const Grid& g, const ModelParams& p, double t_final, int steps, const Array& rho1,
                     const Array& rho2, const Array& v, double tolerance) {
  p.validate();
  Problem pb{g, p, TimeGrid(t_final, steps),
             InitialData{to_field(g, rho1, "rho1"), to_field(g, rho2, "rho2"), to_field(g, v, "v")}, {}};
  pb.init.validate();
  pb.solver.tolerance = tolerance;
  return pb;
}

py::dict trajectory_dict(const StateTrajectory& t) {
  py::dict d;
  std::vector<double> times;
  for (int n = 0; n <= t.steps(); ++n) times.push_back(t.time.time(n));
  d["t"] = py::array_t<double>(static_cast<py::ssize_t>(times.size()), times.data());
  d["rho1"] = to_array(t.rho1);
  d["rho2"] = to_array(t.rho2);
  d["v"] = to_array(t.v);
  return d;
}

ControlMode mode_from(const std::string& s) {
  if (s == "space_time") return ControlMode::SpaceTime;
  if (s == "time_only") return ControlMode::TimeOnly;
  throw ConfigError("control mode must be 'space_time' or 'time_only'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Forward, adjoint and optimal-control solvers for the glioma virotherapy model";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<IterationError>(m, "IterationError", PyExc_RuntimeError);

  py::class_<Grid>(m, "Grid")
      .def(py::init([](std::vector<double> extents, std::vector<int> cells) {
             return Grid::build(static_cast<int>(extents.size()), extents, cells);
           }),
           py::arg("extents"), py::arg("cells"))
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("shape", [](const Grid& g) { return field_shape(g); })
      .def_property_readonly("cell_volume", &Grid::cell_volume)
      .def_property_readonly("volume", &Grid::volume)
      .def("centers", [](const Grid& g) {
        py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(g.size()), g.dim()});
        double* p = out.mutable_data();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const auto x = g.center(i);
          for (int a = 0; a < g.dim(); ++a) *p++ = x[a];
        }
        return out;
      });

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double alpha, double beta, double delta1, double delta2, double delta_v, double b, double B,
                       double u_cap) {
             ModelParams p{alpha, beta, delta1, delta2, delta_v, b, B, u_cap};
             p.validate();
             return p;
           }),
           py::arg("alpha"), py::arg("beta"), py::arg("delta1"), py::arg("delta2"), py::arg("delta_v"),
           py::arg("b"), py::arg("B"), py::arg("u_cap"))
      .def_readwrite("alpha", &ModelParams::alpha)
      .def_readwrite("beta", &ModelParams::beta)
      .def_readwrite("delta1", &ModelParams::delta1)
      .def_readwrite("delta2", &ModelParams::delta2)
      .def_readwrite("delta_v", &ModelParams::delta_v)
      .def_readwrite("b", &ModelParams::b)
      .def_readwrite("B", &ModelParams::B)
      .def_readwrite("u_cap", &ModelParams::u_cap);

  py::class_<Objective>(m, "Objective");
  m.def("terminal_mass", [](double g1, double g2) { return Objective(TerminalMass{g1, g2}); }, py::arg("gamma1"),
        py::arg("gamma2") = 0.0);
  m.def("terminal_mass_dose",
        [](double g1, double g2, double p) { return Objective(TerminalMassPlusDose{g1, g2, p}); },
        py::arg("gamma1"), py::arg("gamma2") = 0.0, py::arg("p") = 2.0);
  m.def("chronic_tracking",
        [](const Grid& g, const Array& target, double p) {
          return Objective(ChronicTracking{to_field(g, target, "target"), p});
        },
        py::arg("grid"), py::arg("target"), py::arg("p") = 2.0);

  m.def(
      "simulate",
      [](const Grid& g, const ModelParams& p, double t_final, int steps, const Array& rho1, const Array& rho2,
         const Array& v, const Array& u, const std::string& mode, double tolerance) {
        const Problem pb = make_problem(g, p, t_final, steps, rho1, rho2, v, tolerance);
        StateTrajectory t;
        {
          py::gil_scoped_release release;
          t = solve_forward(pb.init, pb.control(u, mode_from(mode)), pb.time, pb.params, pb.solver);
        }
        return trajectory_dict(t);
      },
      "Forward solve; returns t and (steps + 1, *shape) arrays for rho1, rho2, v.", py::arg("grid"),
      py::arg("params"), py::arg("t_final"), py::arg("steps"), py::arg("rho1"), py::arg("rho2"), py::arg("v"),
      py::arg("control") = 0.0, py::arg("mode") = "space_time", py::arg("tolerance") = 1e-10);

  m.def(
      "objective_and_gradient",
      [](const Grid& g, const ModelParams& p, double t_final, int steps, const Array& rho1, const Array& rho2,
         const Array& v, const Objective& obj, const Array& u, const std::string& mode, double tolerance) {
        const Problem pb = make_problem(g, p, t_final, steps, rho1, rho2, v, tolerance);
        const Control ctrl = pb.control(u, mode_from(mode));
        double f = 0.0;
        FieldSeries grad;
        {
          py::gil_scoped_release release;
          const StateTrajectory base = solve_forward(pb.init, ctrl, pb.time, pb.params, pb.solver);
          const AdjointTrajectory adj = solve_adjoint(base, ctrl, obj, pb.params, pb.solver);
          f = eval_J(base, ctrl, obj);
          grad = reduced_gradient(adj.z, base, ctrl, obj);
        }
        return py::make_tuple(f, to_array(grad));
      },
      "Reduced objective and its adjoint gradient, shape (steps, *shape).", py::arg("grid"), py::arg("params"),
      py::arg("t_final"), py::arg("steps"), py::arg("rho1"), py::arg("rho2"), py::arg("v"), py::arg("objective"),
      py::arg("control"), py::arg("mode") = "space_time", py::arg("tolerance") = 1e-10);

  m.def(
      "optimize",
      [](const Grid& g, const ModelParams& p, double t_final, int steps, const Array& rho1, const Array& rho2,
         const Array& v, const Objective& obj, const Array& u0, const std::string& mode, int max_iterations,
         double stationarity_tol, double initial_step, double tolerance) {
        const Problem pb = make_problem(g, p, t_final, steps, rho1, rho2, v, tolerance);
        OptimizerOptions opts;
        opts.max_outer_iterations = max_iterations;
        opts.stationarity_tol = stationarity_tol;
        opts.initial_step = initial_step;
        opts.validate();
        const Control start = pb.control(u0, mode_from(mode));
        OcpResult r;
        {
          py::gil_scoped_release release;
          r = solve_ocp(pb.init, pb.params, pb.time, obj, opts, start, pb.solver);
        }
        py::list history;
        for (const IterationRecord& rec : r.history.records) {
          history.append(py::dict(py::arg("iteration") = rec.iteration, py::arg("f") = rec.f,
                                  py::arg("residual") = rec.residual, py::arg("step") = rec.step,
                                  py::arg("backtracks") = rec.backtracks));
        }
        py::dict d;
        d["control"] = to_array(r.control.slices());
        d["gradient"] = to_array(r.gradient);
        d["state"] = trajectory_dict(r.state);
        d["history"] = history;
        d["converged"] = r.converged;
        d["stalled"] = r.stalled;
        return d;
      },
      "Projected-gradient optimal control.", py::arg("grid"), py::arg("params"), py::arg("t_final"),
      py::arg("steps"), py::arg("rho1"), py::arg("rho2"), py::arg("v"), py::arg("objective"),
      py::arg("control") = 0.0, py::arg("mode") = "space_time", py::arg("max_iterations") = 200,
      py::arg("stationarity_tol") = 1e-6, py::arg("initial_step") = 1.0, py::arg("tolerance") = 1e-10);

  m.def(
      "run_config",
      [](const std::string& path, const std::string& output, std::optional<std::string> mode) {
        RunConfig cfg = parse_config(path);
        if (mode) cfg.mode = run_mode_from_string(*mode);
        if (!output.empty()) cfg.output.directory = output;
        RunOutcome out;
        {
          py::gil_scoped_release release;
          out = run(cfg);
        }
        return py::make_tuple(out.exit_code, out.message);
      },
      "Runs a JSON config like the command-line tool; returns (exit_code, message).", py::arg("path"),
      py::arg("output") = "", py::arg("mode") = py::none());
}
