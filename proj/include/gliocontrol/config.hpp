#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gliocontrol/fields.hpp"
#include "gliocontrol/model.hpp"
#include "gliocontrol/objective.hpp"
#include "gliocontrol/optimizer.hpp"
#include "gliocontrol/parabolic.hpp"

namespace gliocontrol {

enum class RunMode { Simulate, Optimize, Gradcheck, Verify };

const char* to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);

struct GridSpec {
  int dim = 2;
  std::vector<double> extents{1.0, 1.0};
  std::vector<int> cells{16, 16};
  bool operator==(const GridSpec&) const = default;
};

/// Initial data / tracking target presets.
struct FieldSpec {
  enum class Kind { Constant, Gaussian, File };
  Kind kind = Kind::Constant;
  double value = 0.0;              ///< Constant
  std::vector<double> center;      ///< Gaussian
  double width = 0.1;              ///< Gaussian
  double amplitude = 0.0;          ///< Gaussian
  std::string path;                ///< File (snapshot stem, absolute after parsing)
  bool operator==(const FieldSpec&) const = default;
};

struct ControlSpec {
  enum class Kind { Zero, Constant, File };
  Kind kind = Kind::Zero;
  double value = 0.0;
  std::string path;
  ControlMode mode = ControlMode::SpaceTime;
  bool operator==(const ControlSpec&) const = default;
};

struct ObjectiveSpec {
  enum class Kind { TerminalMass, TerminalMassPlusDose, ChronicTracking };
  Kind kind = Kind::TerminalMass;
  double gamma1 = 1.0;
  double gamma2 = 0.0;
  double p = 2.0;
  FieldSpec target;
  bool operator==(const ObjectiveSpec&) const = default;
};

struct GradcheckSpec {
  std::vector<double> lambdas{0.1, 0.05, 0.025, 0.0125};
  int directions = 5;
  double fd_epsilon = 1e-3;
  double direction_amplitude = 0.25;  ///< random directions in [-a U, a U]
  bool operator==(const GradcheckSpec&) const = default;
};

struct VerifySpec {
  bool picard = true;
  int picard_max_iter = 100;
  double picard_tol = 1e-10;
  bool operator==(const VerifySpec&) const = default;
};

struct OutputSpec {
  std::string directory = "out";
  int snapshot_every = 0;  ///< 0 keeps only the initial and final states
  bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
  RunMode mode = RunMode::Simulate;
  GridSpec grid;
  double t_final = 1.0;
  int steps = 1000;
  ModelParams params;
  FieldSpec rho1;
  FieldSpec rho2;
  FieldSpec v;
  ControlSpec control;
  ObjectiveSpec objective;
  OptimizerOptions optimizer;
  LinearSolveOptions solver;
  GradcheckSpec gradcheck;
  VerifySpec verify;
  OutputSpec output;
  std::uint64_t seed = 0;

  bool operator==(const RunConfig&) const = default;
};

/// Parses JSON text. Relative file paths are resolved against `base_dir`.
/// Unknown keys and constraint violations throw ConfigError naming the key.
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir);
RunConfig parse_config(const std::filesystem::path& path);

/// Fully resolved JSON form, suitable for re-parsing.
std::string to_json_text(const RunConfig& cfg);

// Materialization of the specs.
Grid make_grid(const GridSpec& spec);
Field make_field(const FieldSpec& spec, const Grid& grid, const char* what);
InitialData make_initial_data(const RunConfig& cfg, const Grid& grid);
Control make_control(const RunConfig& cfg, const Grid& grid);
Objective make_objective(const RunConfig& cfg, const Grid& grid);

}  // namespace gliocontrol
