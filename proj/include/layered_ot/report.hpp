#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "layered_ot/config.hpp"
#include "layered_ot/uniqueness.hpp"

namespace layered_ot {

/// `CHECK <name> PASS|FAIL|SKIP key=value ...`; a field with an empty value
/// prints its key alone.
std::string format_check(const CheckResult& c);

/// True when the line matches `CHECK <name> (PASS|FAIL|SKIP) <key=value>*`.
bool is_valid_check_line(const std::string& line);

struct SummaryHeader {
  std::string config;
  std::string kind;
  std::uint64_t seed = 1;
};

/// `#` header lines followed by one CHECK line per check and a final
/// `CHECK verdict` line.
void write_summary(std::ostream& os, const TheoremVerdict& v, const SummaryHeader& h);
std::string summary_text(const TheoremVerdict& v, const SummaryHeader& h);

/// i, j[, k], mass.
void write_plan_tsv(std::ostream& os, const TransportPlan& plan);
/// marginal, index, potential.
void write_duals_tsv(std::ostream& os, const DualCertificate& cert);
/// Source coordinates, target coordinates, mass per support entry.
void write_plot_support_tsv(std::ostream& os, const RunArtifacts& a);
/// section, check, status, key, value.
void write_details_tsv(std::ostream& os, const TheoremVerdict& v);

/// Writes summary.tsv and the optional files into `dir` (created when
/// missing); records the paths in v.artifacts.paths.
void write_run_outputs(const std::string& dir, TheoremVerdict& v, const SummaryHeader& h,
                       const OutputOptions& o);

}  // namespace layered_ot
