#pragma once

#include <string>

#include "gliocontrol/config.hpp"

namespace gliocontrol {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitVerification = 4,
};

/// Pass thresholds of the gradcheck mode.
inline constexpr double kGradcheckCosineMin = 0.999;
inline constexpr double kGradcheckRelErrMax = 5e-2;
inline constexpr double kDualityResidualMax = 5e-2;

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;
};

/// Executes one run and writes its artifacts into cfg.output.directory:
///   config.frozen.json  resolved configuration (re-parses to cfg)
///   summary.json        deterministic results
///   timings.json        wall-clock timings (kept out of the summary)
///   timeseries.csv      t, integrals and min/max of rho1, rho2, v
///   snapshots/          field snapshots (.bin + .hdr)
/// plus history.csv (optimize) or convergence.csv / gradcheck.csv (gradcheck).
/// Errors are mapped to exit codes rather than thrown.
RunOutcome run(const RunConfig& cfg);

}  // namespace gliocontrol
