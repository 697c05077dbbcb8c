#include "layered_ot/report.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <regex>
#include <sstream>

#include "format.hpp"
#include "layered_ot/errors.hpp"

namespace layered_ot {

std::string format_check(const CheckResult& c) {
  std::string s = "CHECK " + c.name + " " + to_string(c.status);
  for (const auto& [k, v] : c.fields) s += v.empty() ? " " + k : " " + k + "=" + v;
  return s;
}

bool is_valid_check_line(const std::string& line) {
  static const std::regex re(R"(CHECK [A-Za-z0-9_.]+ (PASS|FAIL|SKIP)( [^ =]+=[^ ]*)*)");
  return std::regex_match(line, re);
}

void write_summary(std::ostream& os, const TheoremVerdict& v, const SummaryHeader& h) {
  os << "# layered-ot summary\n";
  os << "# config=" << h.config << "\n";
  os << "# scenario=" << h.kind << " theorem=" << to_string(v.id) << " seed=" << h.seed << "\n";
  for (const CheckResult* c : v.all_checks()) os << format_check(*c) << "\n";
  CheckResult verdict;
  verdict.name = "verdict";
  verdict.status = v.ok() ? CheckStatus::pass : CheckStatus::fail;
  verdict.add("theorem", to_string(v.id));
  verdict.add("hypotheses", std::string(v.hypotheses_hold() ? "hold" : "violated"));
  verdict.add("unique_evidence", v.unique_evidence);
  os << format_check(verdict) << "\n";
}

std::string summary_text(const TheoremVerdict& v, const SummaryHeader& h) {
  std::ostringstream os;
  write_summary(os, v, h);
  return os.str();
}

void write_plan_tsv(std::ostream& os, const TransportPlan& plan) {
  const bool three = plan.arity() == 3;
  os << "# plan support, " << plan.support_size() << " entries\n";
  os << (three ? "# i\tj\tk\tmass\n" : "# i\tj\tmass\n");
  for (const auto& e : plan.entries()) {
    os << e.idx[0] << '\t' << e.idx[1];
    if (three) os << '\t' << e.idx[2];
    os << '\t' << detail::fmt_real(e.mass) << '\n';
  }
}

void write_duals_tsv(std::ostream& os, const DualCertificate& cert) {
  os << "# dual potentials, sense=" << (cert.sense == Sense::minimize ? "minimize" : "maximize")
     << " primal=" << detail::fmt_real(cert.primal) << " dual=" << detail::fmt_real(cert.dual) << "\n";
  os << "# marginal\tindex\tpotential\n";
  for (std::size_t m = 0; m < cert.potentials.size(); ++m)
    for (std::size_t i = 0; i < cert.potentials[m].size(); ++i)
      os << m << '\t' << i << '\t' << detail::fmt_real(cert.potentials[m][i]) << '\n';
}

void write_plot_support_tsv(std::ostream& os, const RunArtifacts& a) {
  const std::size_t arity = a.plan.arity();
  if (a.measures.size() < arity) throw UsageError("plot_support: measures missing");
  os << "# transport diagram: one line per support entry\n#";
  const char* names[3] = {"x", "y", "z"};
  for (std::size_t m = 0; m < arity; ++m)
    for (std::size_t d = 0; d < a.measures[m].dim(); ++d) os << (m + d ? "\t" : " ") << names[m] << d;
  os << "\tmass\n";
  for (const auto& e : a.plan.entries()) {
    bool first = true;
    for (std::size_t m = 0; m < arity; ++m)
      for (double v : a.measures[m].point(e.idx[m])) {
        if (!first) os << '\t';
        os << detail::fmt_real(v);
        first = false;
      }
    os << '\t' << detail::fmt_real(e.mass) << '\n';
  }
}

void write_details_tsv(std::ostream& os, const TheoremVerdict& v) {
  os << "# check details\n# section\tcheck\tstatus\tkey\tvalue\n";
  const std::pair<const char*, const std::vector<CheckResult>*> sections[] = {
      {"hypothesis", &v.hypotheses},
      {"solver", &v.solver},
      {"conclusion", &v.conclusions},
      {"counterexample", &v.counterexample}};
  for (const auto& [name, checks] : sections)
    for (const auto& c : *checks) {
      if (c.fields.empty()) os << name << '\t' << c.name << '\t' << to_string(c.status) << "\t\t\n";
      for (const auto& [k, val] : c.fields)
        os << name << '\t' << c.name << '\t' << to_string(c.status) << '\t' << k << '\t' << val << '\n';
    }
}

namespace {

template <class F>
void write_file(const std::filesystem::path& p, TheoremVerdict& v, F&& body) {
  std::ofstream f(p);
  if (!f) throw Error("cannot write " + p.string());
  body(f);
  if (!f) throw Error("write failed: " + p.string());
  v.artifacts.paths.push_back(p.string());
}

}  // namespace

void write_run_outputs(const std::string& dir, TheoremVerdict& v, const SummaryHeader& h,
                       const OutputOptions& o) {
  const std::filesystem::path d(dir);
  std::filesystem::create_directories(d);
  v.artifacts.paths.clear();
  write_file(d / "summary.tsv", v, [&](std::ostream& f) { write_summary(f, v, h); });
  if (o.plan) write_file(d / "plan.tsv", v, [&](std::ostream& f) { write_plan_tsv(f, v.artifacts.plan); });
  if (o.duals) write_file(d / "duals.tsv", v, [&](std::ostream& f) { write_duals_tsv(f, v.artifacts.cert); });
  if (o.plot)
    write_file(d / "plot_support.tsv", v, [&](std::ostream& f) { write_plot_support_tsv(f, v.artifacts); });
  if (o.details) write_file(d / "details.tsv", v, [&](std::ostream& f) { write_details_tsv(f, v); });
}

}  // namespace layered_ot
