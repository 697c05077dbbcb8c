// layered-ot: batch front-end for the layered transport scenarios.
//
//   layered-ot run CONFIG... [--config PATH]... [--dump-dir DIR] [--seed N]
//                  [--jobs N] [--tol-face X] [--trials N]
//   layered-ot list
//   layered-ot --list

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "layered_ot/config.hpp"
#include "layered_ot/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace layered_ot;
  CLI::App app{"Exact discrete transport toolkit for layered scenarios"};
  app.require_subcommand(0, 1);
  bool list_flag = false;
  app.add_flag("--list", list_flag, "Print the built-in scenario kinds and exit");

  PipelineOptions options;
  std::vector<std::string> positional, flagged;
  std::string dump_dir;
  std::uint64_t seed = 0;
  int trials = 0;
  double tol_face = 0.0;

  CLI::App* run = app.add_subcommand("run", "Run scenario configs");
  run->add_option("configs", positional, "Config files");
  run->add_option("--config", flagged, "Config file (repeatable)");
  run->add_option("--dump-dir", dump_dir, "Write outputs to DIR/<config stem>/");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Seed for generators and probes");
  run->add_option("--jobs", options.jobs, "Configs run concurrently")->check(CLI::PositiveNumber);
  CLI::Option* trials_opt =
      run->add_option("--trials", trials, "Face probe trials")->check(CLI::PositiveNumber);
  CLI::Option* tol_opt =
      run->add_option("--tol-face", tol_face, "Face slack tolerance")->check(CLI::PositiveNumber);
  CLI::App* list = app.add_subcommand("list", "Print the built-in scenario kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_bad_config;
  }

  if (list_flag || list->parsed()) {
    std::cout << list_scenarios();
    return exit_ok;
  }
  if (!run->parsed()) {
    std::cerr << app.help();
    return exit_bad_config;
  }
  options.configs = positional;
  options.configs.insert(options.configs.end(), flagged.begin(), flagged.end());
  if (options.configs.empty()) {
    std::cerr << "run: no config given\n";
    return exit_bad_config;
  }
  if (!dump_dir.empty()) options.dump_dir = dump_dir;
  if (seed_opt->count()) options.overrides.seed = seed;
  if (trials_opt->count()) options.overrides.trials = trials;
  if (tol_opt->count()) options.overrides.tol_face = tol_face;
  return run_pipeline(options, std::cout, std::cerr);
}
