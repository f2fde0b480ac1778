// stepmap command-line interface: optimize | map | fit | query | validate |
// render | lipm-compare. Exit codes: 0 success, 1 usage, 2 validation or
// contract failure, 3 partial node failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "stepmap/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gait-parameter optimization and energy-optimal step maps"};
  app.require_subcommand(1);

  std::string config_path;
  int workers = -1;
  std::uint64_t seed = 0;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON configuration file (defaults when omitted)");
  auto* opt_workers =
      app.add_option("--workers", workers, "worker threads (0 = hardware concurrency)")
          ->check(CLI::Range(0, 4096));
  auto* opt_seed = app.add_option("--seed", seed, "master RNG seed override");
  auto* opt_out = app.add_option("--out", out_dir, "output directory override");

  auto* c_optimize =
      app.add_subcommand("optimize", "Phase 1: per-node Bayesian gait-parameter optimization");
  auto* c_map = app.add_subcommand("map", "Phase 2: dense reachability and torque maps");
  auto* c_fit = app.add_subcommand("fit", "Train the SVM safe region and the step selector");

  auto* c_query = app.add_subcommand("query", "Energy-optimal step and parameters for a velocity");
  double vel = 0.0;
  c_query->add_option("--vel", vel, "initial CoM velocity [m/s]")->required();

  auto* c_validate = app.add_subcommand("validate", "Simulate seeded trials against the models");
  stepmap::ValidateOptions vopt;
  c_validate->add_option("--mode", vopt.mode, "validation protocol")
      ->check(CLI::IsMember({"reach", "step-select"}));
  c_validate->add_option("--n", vopt.n, "number of trials")->check(CLI::PositiveNumber);

  auto* c_render = app.add_subcommand("render", "Write SVG and PPM heatmaps");
  stepmap::RenderOptions ropt;
  c_render->add_option("--what", ropt.what, "which figure to render")
      ->check(CLI::IsMember({"reach", "torque", "near-opt", "safe-region", "swing-time"}));
  c_render->add_option("--delta", ropt.delta, "near-optimal fraction for --what near-opt")
      ->check(CLI::NonNegativeNumber);

  auto* c_lipm = app.add_subcommand("lipm-compare", "Torque error of the LIPM step prediction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? stepmap::kExitSuccess : stepmap::kExitUsage;
  }

  try {
    stepmap::PipelineConfig config;
    if (!config_path.empty()) config = stepmap::PipelineConfig::load(config_path);
    if (opt_workers->count() > 0) config.workers = workers;
    if (opt_seed->count() > 0) config.seed = seed;
    if (opt_out->count() > 0) config.out_dir = out_dir;

    if (c_optimize->parsed()) return stepmap::cmd_optimize(config, std::cout);
    if (c_map->parsed()) return stepmap::cmd_map(config, std::cout);
    if (c_fit->parsed()) return stepmap::cmd_fit(config, std::cout);
    if (c_query->parsed()) return stepmap::cmd_query(config, vel, std::cout);
    if (c_validate->parsed()) return stepmap::cmd_validate(config, vopt, std::cout);
    if (c_render->parsed()) return stepmap::cmd_render(config, ropt, std::cout);
    if (c_lipm->parsed()) return stepmap::cmd_lipm_compare(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return stepmap::kExitValidation;
  }
  return stepmap::kExitUsage;
}
