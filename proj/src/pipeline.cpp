#include "layered_ot/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <ostream>
#include <thread>

#include "layered_ot/errors.hpp"
#include "layered_ot/report.hpp"

namespace layered_ot {

RunOutcome run_config(const std::string& path, const PipelineOptions& options) {
  RunOutcome out;
  out.config = path;
  RunSettings settings;
  try {
    settings = build_run_settings(load_config(path), options.overrides);
  } catch (const ConfigError& e) {
    out.exit_code = exit_bad_config;
    out.error = e.what();
    return out;
  }
  try {
    TheoremVerdict v = run_theorem_scenario(settings.spec);
    const SummaryHeader h{std::filesystem::path(path).filename().string(), settings.kind, settings.seed};
    std::string dir = settings.output.dir;
    if (options.dump_dir) dir = (std::filesystem::path(*options.dump_dir) / std::filesystem::path(path).stem()).string();
    if (!dir.empty()) write_run_outputs(dir, v, h, settings.output);
    out.summary = summary_text(v, h);
    out.files = v.artifacts.paths;
    if (!v.ok()) {
      out.exit_code = exit_check_failed;
      out.error = path + ": one or more checks failed";
    }
  } catch (const ConfigError& e) {
    out.exit_code = exit_bad_config;
    out.error = path + ": " + e.what();
  } catch (const UnsupportedShape& e) {
    out.exit_code = exit_bad_config;
    out.error = path + ": " + e.what();
  } catch (const std::exception& e) {
    out.exit_code = exit_check_failed;
    out.error = path + ": run error: " + e.what();
  }
  return out;
}

int run_pipeline(const PipelineOptions& options, std::ostream& out, std::ostream& err) {
  const std::size_t n = options.configs.size();
  std::vector<RunOutcome> results(n);
  const std::size_t workers = std::clamp<std::size_t>(options.jobs < 1 ? 1 : options.jobs, 1, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) results[i] = run_config(options.configs[i], options);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  int code = exit_ok;
  for (const auto& r : results) {
    out << r.summary;
    if (!r.error.empty()) err << r.error << "\n";
    if (r.exit_code == exit_bad_config)
      code = exit_bad_config;
    else if (r.exit_code == exit_check_failed && code == exit_ok)
      code = exit_check_failed;
  }
  return code;
}

}  // namespace layered_ot
