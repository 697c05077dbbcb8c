#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "layered_ot/config.hpp"

namespace layered_ot {

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_bad_config = 2 };

struct PipelineOptions {
  std::vector<std::string> configs;
  /// Outputs go to <dump_dir>/<config stem>/; overrides output.dir.
  std::optional<std::string> dump_dir;
  RunOverrides overrides;
  int jobs = 1;
};

struct RunOutcome {
  std::string config;
  int exit_code = exit_ok;
  /// summary.tsv contents; empty when the config was rejected.
  std::string summary;
  /// Diagnostic for exit codes other than 0.
  std::string error;
  std::vector<std::string> files;
};

/// Parse, run and report one config. Never throws: config problems map to
/// exit 2, failed checks and runtime errors to exit 1.
RunOutcome run_config(const std::string& path, const PipelineOptions& options);

/// Runs every config (`jobs` at a time), prints summaries in config order to
/// `out` and diagnostics to `err`. Returns 2 if any config was rejected,
/// else 1 if any run failed, else 0.
int run_pipeline(const PipelineOptions& options, std::ostream& out, std::ostream& err);

}  // namespace layered_ot
