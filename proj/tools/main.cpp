#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gliocontrol/config.hpp"
#include "gliocontrol/errors.hpp"
#include "gliocontrol/run.hpp"

using namespace gliocontrol;

int main(int argc, char** argv) {
  CLI::App app{"Glioma virotherapy simulation and optimal control"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::optional<std::uint64_t> seed;

  for (RunMode mode : {RunMode::Simulate, RunMode::Optimize, RunMode::Gradcheck, RunMode::Verify}) {
    CLI::App* sub = app.add_subcommand(to_string(mode));
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--output", output_dir, "output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "random seed (overrides seed)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  RunConfig cfg;
  try {
    cfg = parse_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  // The subcommand decides the mode; a config written for another mode is reused as is.
  cfg.mode = run_mode_from_string(app.get_subcommands().front()->get_name());
  if (!output_dir.empty()) cfg.output.directory = output_dir;
  if (seed) cfg.seed = *seed;

  const RunOutcome out = run(cfg);
  if (out.exit_code != kExitOk) std::cerr << "error: " << out.message << '\n';
  return out.exit_code;
}
