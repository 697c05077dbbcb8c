#include <gtest/gtest.h>

#include <cstdlib>
#include <optional>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "layered_ot/config.hpp"
#include "layered_ot/errors.hpp"
#include "layered_ot/pipeline.hpp"
#include "layered_ot/report.hpp"

using namespace layered_ot;

namespace {

const std::string kSourceDir = LAYERED_OT_SOURCE_DIR;

std::string config_path(const std::string& name) { return kSourceDir + "/configs/" + name; }

std::string error_of(const std::string& text, const RunOverrides& o = {}) {
  try {
    build_run_settings(parse_config(text, "test.cfg"), o);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const std::string kLayered =
    "scenario = t31_layered\n"
    "cost.family = power\n"
    "cost.p = 2\n"
    "geometry.grid = 10\n"
    "geometry.target_grid = 2\n"
    "measure.perturb = quantized\n";

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    if (value)
      ::setenv(name, value, 1);
    else
      ::unsetenv(name);
  }
  ~ScopedEnv() {
    if (old_)
      ::setenv(name_, old_->c_str(), 1);
    else
      ::unsetenv(name_);
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

}  // namespace

TEST(ConfigParse, KeysValuesAndComments) {
  const auto c = parse_config("# header\n\na = 1\n  b.c=two words # trailing\n", "x.cfg");
  ASSERT_EQ(c.entries().size(), 2u);
  EXPECT_EQ(c.get_int("a", 0), 1);
  EXPECT_EQ(c.get_string("b.c", ""), "two words");
  EXPECT_EQ(c.find("b.c")->line, 4);
  EXPECT_EQ(c.get_real("missing", 2.5), 2.5);
  EXPECT_EQ(c.source(), "x.cfg");
}

TEST(ConfigParse, SyntaxErrorsCarryLineNumbers) {
  try {
    parse_config("a = 1\nnot a pair\n", "bad.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.cfg:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("bad key = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("= 1\n"), ConfigError);
}

TEST(ConfigParse, TypedGetters) {
  const auto c = parse_config("i = 12x\nr = 0.5\nb = yes\nl = 0.2, 0.3 0.5\nbad = 1,,q\n", "t.cfg");
  EXPECT_THROW(c.get_int("i", 0), ConfigError);
  EXPECT_EQ(c.get_real("r", 0.0), 0.5);
  EXPECT_TRUE(c.get_bool("b", false));
  EXPECT_EQ(c.get_reals("l", {}), (std::vector<double>{0.2, 0.3, 0.5}));
  EXPECT_THROW(c.get_reals("bad", {}), ConfigError);
  try {
    c.get_int("i", 0);
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("t.cfg:1: field 'i':", 0), 0u) << e.what();
  }
}

TEST(ConfigSettings, MissingFamilyNamesField) {
  const std::string msg = error_of("scenario = t31_layered\ngeometry.grid = 10\n");
  EXPECT_NE(msg.find("field 'cost.family'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("missing required field"), std::string::npos);
}

TEST(ConfigSettings, UnknownKeysAndKinds) {
  EXPECT_NE(error_of(kLayered + "geometry.colour = red\n").find("test.cfg:7: field 'geometry.colour'"),
            std::string::npos);
  EXPECT_NE(error_of("scenario = nope\ncost.family = quadratic\n").find("unknown scenario kind"),
            std::string::npos);
  EXPECT_NE(error_of(kLayered + "theorem = T6.1\n"), "");
  EXPECT_NE(error_of("scenario = cex_atomic\ncost.family = quadratic\nexpect = hold\n"), "");
  EXPECT_NE(error_of("scenario = cex_atomic\ncost.family = power\ncost.p = 3\n"), "");
  EXPECT_NE(error_of(kLayered + "probe.tol_face = -1\n"), "");
  EXPECT_NE(error_of(kLayered + "cost.family2 = x\n"), "");
}

TEST(ConfigSettings, BuildsLayeredRun) {
  const auto s = build_run_settings(parse_config(kLayered + "geometry.K = 3\nprobe.trials = 7\n"));
  EXPECT_EQ(s.kind, "t31_layered");
  const auto* run = std::get_if<LayeredRun>(&s.spec);
  ASSERT_NE(run, nullptr);
  EXPECT_EQ(run->scenario.K, 3);
  EXPECT_EQ(run->scenario.grid, 10);
  EXPECT_EQ(run->scenario.target_grid, 2);
  EXPECT_EQ(run->scenario.perturb, Perturbation::quantized);
  EXPECT_EQ(run->probe.trials, 7);
  EXPECT_EQ(run->cost.family(), CostFamily::power);
}

TEST(ConfigSettings, SeedPrecedence) {
  {
    ScopedEnv env("LAYERED_OT_SEED", nullptr);
    EXPECT_EQ(build_run_settings(parse_config(kLayered)).seed, 1u);
  }
  {
    ScopedEnv env("LAYERED_OT_SEED", "17");
    EXPECT_EQ(build_run_settings(parse_config(kLayered)).seed, 17u);
    EXPECT_EQ(build_run_settings(parse_config(kLayered + "seed = 5\n")).seed, 5u);
    RunOverrides o;
    o.seed = 99;
    const auto s = build_run_settings(parse_config(kLayered + "seed = 5\n"), o);
    EXPECT_EQ(s.seed, 99u);
    EXPECT_EQ(std::get<LayeredRun>(s.spec).scenario.seed, 99u);
  }
  {
    ScopedEnv env("LAYERED_OT_SEED", "abc");
    EXPECT_THROW(build_run_settings(parse_config(kLayered)), ConfigError);
  }
}

TEST(ConfigSettings, RegistryListsEveryKind) {
  const auto& reg = scenario_registry();
  ASSERT_EQ(reg.size(), 7u);
  const std::string text = list_scenarios();
  for (const auto& k : reg) {
    EXPECT_NE(text.find(k.name + "\t" + k.theorem + "\t"), std::string::npos);
  }
}

TEST(ConfigSettings, ShippedConfigsParse) {
  for (const auto& entry : std::filesystem::directory_iterator(kSourceDir + "/configs")) {
    if (entry.path().extension() != ".cfg") continue;
    EXPECT_NO_THROW(build_run_settings(load_config(entry.path().string()))) << entry.path();
  }
  EXPECT_THROW(load_config(kSourceDir + "/configs/does_not_exist.cfg"), ConfigError);
}

TEST(Report, SummaryLinesFollowGrammar) {
  PipelineOptions opt;
  for (const char* name : {"t31_k2.cfg", "atomic_counterexample.cfg", "t41_k2l2.cfg", "t61_disk.cfg"}) {
    const auto r = run_config(config_path(name), opt);
    ASSERT_EQ(r.exit_code, exit_ok) << r.error;
    std::istringstream in(r.summary);
    std::string line;
    int checks = 0;
    std::string last;
    while (std::getline(in, line)) {
      if (line.rfind("#", 0) == 0) continue;
      EXPECT_TRUE(is_valid_check_line(line)) << line;
      ++checks;
      last = line;
    }
    EXPECT_GT(checks, 3);
    EXPECT_EQ(last.rfind("CHECK verdict PASS", 0), 0u) << last;
  }
  EXPECT_FALSE(is_valid_check_line("CHECK x MAYBE"));
  EXPECT_FALSE(is_valid_check_line("CHECK x PASS a=1  b=2"));
  EXPECT_TRUE(is_valid_check_line("CHECK face_probe PASS dim_lb=0 trials=20"));
}

TEST(Report, SummariesAreByteIdentical) {
  PipelineOptions opt;
  const auto a = run_config(config_path("t31_k2.cfg"), opt);
  const auto b = run_config(config_path("t31_k2.cfg"), opt);
  ASSERT_EQ(a.exit_code, exit_ok);
  EXPECT_EQ(a.summary, b.summary);
}

TEST(Pipeline, WritesOutputsAndOrdersResults) {
  const auto dir = std::filesystem::temp_directory_path() / "layered_ot_config_test";
  std::filesystem::remove_all(dir);
  PipelineOptions opt;
  opt.configs = {config_path("t31_k2.cfg"), config_path("cex_perpendicular.cfg")};
  opt.dump_dir = dir.string();
  opt.jobs = 2;
  std::ostringstream out, err;
  EXPECT_EQ(run_pipeline(opt, out, err), exit_ok) << err.str();
  for (const char* f : {"summary.tsv", "plan.tsv", "duals.tsv", "plot_support.tsv", "details.tsv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "t31_k2" / f)) << f;
    EXPECT_TRUE(std::filesystem::exists(dir / "cex_perpendicular" / f)) << f;
  }
  const std::string s = out.str();
  EXPECT_LT(s.find("# config=t31_k2.cfg"), s.find("# config=cex_perpendicular.cfg"));
  std::ifstream f(dir / "t31_k2" / "summary.tsv");
  std::stringstream file;
  file << f.rdbuf();
  EXPECT_EQ(s.substr(0, file.str().size()), file.str());
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, ExitCodeSeverity) {
  PipelineOptions opt;
  opt.configs = {config_path("t31_k2.cfg"), kSourceDir + "/tests/data/missing_family.cfg"};
  std::ostringstream out, err;
  EXPECT_EQ(run_pipeline(opt, out, err), exit_bad_config);
  EXPECT_NE(err.str().find("cost.family"), std::string::npos);
}
