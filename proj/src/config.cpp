#include "layered_ot/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "layered_ot/errors.hpp"

namespace layered_ot {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

}  // namespace

ScenarioConfig::ScenarioConfig(std::string source, std::vector<ConfigEntry> entries)
    : source_(std::move(source)), entries_(std::move(entries)) {}

const ConfigEntry* ScenarioConfig::find(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

void ScenarioConfig::fail(const ConfigEntry& e, const std::string& message) const {
  throw ConfigError(source_ + ":" + std::to_string(e.line) + ": field '" + e.key + "': " + message);
}

void ScenarioConfig::fail(const std::string& key, const std::string& message) const {
  if (const ConfigEntry* e = find(key)) fail(*e, message);
  throw ConfigError(source_ + ": field '" + key + "': " + message);
}

std::string ScenarioConfig::require(const std::string& key) const {
  const ConfigEntry* e = find(key);
  if (!e) fail(key, "missing required field");
  if (e->value.empty()) fail(*e, "empty value");
  return e->value;
}

std::string ScenarioConfig::get_string(const std::string& key, const std::string& fallback) const {
  const ConfigEntry* e = find(key);
  return e ? e->value : fallback;
}

long ScenarioConfig::get_int(const std::string& key, long fallback) const {
  const ConfigEntry* e = find(key);
  if (!e) return fallback;
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(e->value.c_str(), &end, 10);
  if (e->value.empty() || *end != '\0' || errno == ERANGE) fail(*e, "expected an integer, got '" + e->value + "'");
  return v;
}

double ScenarioConfig::get_real(const std::string& key, double fallback) const {
  const ConfigEntry* e = find(key);
  if (!e) return fallback;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(e->value.c_str(), &end);
  if (e->value.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
    fail(*e, "expected a real number, got '" + e->value + "'");
  return v;
}

bool ScenarioConfig::get_bool(const std::string& key, bool fallback) const {
  const ConfigEntry* e = find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  fail(*e, "expected true or false, got '" + e->value + "'");
}

std::vector<double> ScenarioConfig::get_reals(const std::string& key,
                                              const std::vector<double>& fallback) const {
  const ConfigEntry* e = find(key);
  if (!e) return fallback;
  std::string s = e->value;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (*end != '\0' || !std::isfinite(v)) fail(*e, "expected a list of reals, got '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(*e, "empty list");
  return out;
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string raw;
  std::vector<ConfigEntry> entries;
  std::set<std::string> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(line) + ": expected 'key = value'");
    ConfigEntry e{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
    if (!valid_key(e.key))
      throw ConfigError(source + ":" + std::to_string(line) + ": invalid key '" + e.key + "'");
    if (!seen.insert(e.key).second)
      throw ConfigError(source + ":" + std::to_string(line) + ": field '" + e.key + "': duplicate key");
    entries.push_back(std::move(e));
  }
  return ScenarioConfig(source, std::move(entries));
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot read config file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

const std::vector<ScenarioKindInfo>& scenario_registry() {
  static const std::vector<ScenarioKindInfo> r{
      {"t31_layered", "T3.1", "strictly convex h(x-y), source plane against K parallel layers"},
      {"t32_tilted", "T3.2", "quadratic cost, source plane against K tilted planes"},
      {"t41_threemarginal", "T4.1", "three-marginal surplus, K x L layers"},
      {"t53_subtwist", "T5.3", "sub-twist cost, mixed interior/boundary source"},
      {"t61_boundary", "T6.1/C6.2", "quadratic cost, mixed source on a convex domain, normal fans"},
      {"cex_atomic", "T3.1", "atomic second layer counterexample"},
      {"cex_perpendicular", "T3.2", "perpendicular planes counterexample"},
  };
  return r;
}

std::string list_scenarios() {
  std::string out;
  for (const auto& k : scenario_registry()) out += k.name + "\t" + k.theorem + "\t" + k.description + "\n";
  return out;
}

namespace {

const std::set<std::string> kCommon = {
    "scenario",      "seed",         "expect",          "theorem",        "cost.family",
    "cost.p",        "probe.trials", "probe.tol_face",  "probe.tol_plan", "probe.agreement_seeds",
    "output.dir",    "output.plan",  "output.duals",    "output.plot",    "output.details"};

const std::map<std::string, std::set<std::string>> kSchemas = {
    {"t31_layered",
     {"geometry.n", "geometry.K", "geometry.grid", "geometry.target_grid", "geometry.offsets",
      "geometry.source_offset", "measure.t", "measure.perturb", "measure.amplitude", "measure.jitter",
      "measure.atomic_first_layer", "checks.twist_samples", "checks.cycle_samples"}},
    {"t32_tilted",
     {"geometry.n", "geometry.grid", "geometry.target_grid", "geometry.source.anchor",
      "geometry.source.normal", "geometry.layers", "measure.t", "measure.perturb", "measure.amplitude",
      "measure.jitter", "checks.twist_samples", "checks.cycle_samples"}},
    {"t41_threemarginal",
     {"geometry.n", "geometry.K", "geometry.L", "geometry.grid", "geometry.target_grid",
      "geometry.y_offsets", "geometry.z_offsets", "measure.t", "measure.s", "measure.perturb",
      "measure.amplitude", "measure.jitter", "checks.twist_samples"}},
    {"t53_subtwist",
     {"geometry.shape", "geometry.axes", "geometry.grid", "geometry.boundary_nodes", "measure.split",
      "measure.jitter", "targets.count", "targets.box", "checks.chart_nodes", "checks.pair_samples",
      "checks.cycle_samples"}},
    {"t61_boundary",
     {"geometry.shape", "geometry.axes", "geometry.grid", "geometry.boundary_nodes", "measure.split",
      "measure.jitter", "fan.interior", "fan.dilation", "fan.r_min", "fan.r_max", "fan.points_per_ray",
      "fan.quantized", "checks.tol_normal", "checks.min_interior_single"}},
    {"cex_atomic", {"geometry.grid"}},
    {"cex_perpendicular", {"geometry.grid", "checks.plans"}},
};

const ScenarioKindInfo* kind_info(const std::string& name) {
  for (const auto& k : scenario_registry())
    if (k.name == name) return &k;
  return nullptr;
}

bool allowed(const std::string& kind, const std::string& key) {
  if (kCommon.count(key) || kSchemas.at(kind).count(key)) return true;
  if (kind == "t32_tilted" && key.rfind("geometry.layer", 0) == 0) {
    const std::string rest = key.substr(14);
    const auto dot = rest.find('.');
    if (dot == std::string::npos || dot == 0) return false;
    const std::string num = rest.substr(0, dot), field = rest.substr(dot + 1);
    return std::all_of(num.begin(), num.end(), ::isdigit) && (field == "anchor" || field == "normal");
  }
  return false;
}

int positive_int(const ScenarioConfig& c, const std::string& key, long fallback) {
  const long v = c.get_int(key, fallback);
  if (v < 1 || v > 1000000) c.fail(key, "must be a positive integer");
  return static_cast<int>(v);
}

double positive_real(const ScenarioConfig& c, const std::string& key, double fallback) {
  const double v = c.get_real(key, fallback);
  if (!(v > 0.0)) c.fail(key, "must be > 0");
  return v;
}

double unit_interval(const ScenarioConfig& c, const std::string& key, double fallback, bool closed_one) {
  const double v = c.get_real(key, fallback);
  if (v < 0.0 || (closed_one ? v > 1.0 : v >= 1.0)) c.fail(key, "out of range");
  return v;
}

template <class T>
T parse_with(const ScenarioConfig& c, const std::string& key, T fallback, T (*parse)(const std::string&)) {
  const ConfigEntry* e = c.find(key);
  if (!e) return fallback;
  try {
    return parse(e->value);
  } catch (const Error& err) {
    c.fail(*e, err.what());
  }
}

CostModel parse_cost(const ScenarioConfig& c) {
  const std::string family = c.require("cost.family");
  const double p = c.get_real("cost.p", 2.0);
  if (family == "power" && !(p > 1.0)) c.fail("cost.p", "power cost needs p > 1");
  try {
    return make_cost(family, p);
  } catch (const Error& e) {
    c.fail("cost.family", e.what());
  }
}

Expectation parse_expect(const ScenarioConfig& c, Expectation fallback) {
  const ConfigEntry* e = c.find("expect");
  if (!e) return fallback;
  if (e->value == "hold") return Expectation::hypotheses_hold;
  if (e->value == "counterexample") return Expectation::counterexample;
  c.fail(*e, "expected 'hold' or 'counterexample'");
}

ProbeSettings parse_probe(const ScenarioConfig& c, std::uint64_t seed, const RunOverrides& o) {
  ProbeSettings p;
  p.seed = seed;
  p.trials = o.trials ? *o.trials : positive_int(c, "probe.trials", p.trials);
  p.tol_face = o.tol_face ? *o.tol_face : positive_real(c, "probe.tol_face", p.tol_face);
  p.tol_plan = positive_real(c, "probe.tol_plan", p.tol_plan);
  const long a = c.get_int("probe.agreement_seeds", p.agreement_seeds);
  if (a < 0 || a > 100) c.fail("probe.agreement_seeds", "must be in [0,100]");
  p.agreement_seeds = static_cast<int>(a);
  if (p.trials < 1) throw ConfigError("trials must be positive");
  if (!(p.tol_face > 0.0)) throw ConfigError("tol-face must be > 0");
  return p;
}

Perturbation perturbation(const ScenarioConfig& c) {
  return parse_with<Perturbation>(c, "measure.perturb", Perturbation::none, &parse_perturbation);
}

std::vector<double> masses(const ScenarioConfig& c, const std::string& key) {
  const std::vector<double> t = c.get_reals(key, {});
  for (double v : t)
    if (v < 0.0) c.fail(key, "masses must be nonnegative");
  return t;
}

Shape parse_shape(const ScenarioConfig& c) {
  const std::string s = c.get_string("geometry.shape", "ball");
  const std::vector<double> axes = c.get_reals("geometry.axes", {1.0, 1.0});
  for (double a : axes)
    if (!(a > 0.0)) c.fail("geometry.axes", "semi-axes must be > 0");
  if (s == "ball") {
    for (double a : axes)
      if (a != axes.front()) c.fail("geometry.axes", "a ball needs equal axes");
    return Shape::ball(static_cast<int>(axes.size()), axes.front());
  }
  if (s == "ellipsoid") return Shape::ellipsoid(axes);
  c.fail("geometry.shape", "expected ball or ellipsoid");
}

MixedMeasureSpec parse_mixed(const ScenarioConfig& c, std::uint64_t seed) {
  MixedMeasureSpec m;
  m.split = unit_interval(c, "measure.split", 0.5, false);
  m.jitter = unit_interval(c, "measure.jitter", 0.5, false);
  m.boundary_nodes = positive_int(c, "geometry.boundary_nodes", 32);
  m.seed = seed;
  return m;
}

PlaneSpec parse_plane(const ScenarioConfig& c, const std::string& prefix) {
  PlaneSpec p;
  p.anchor = c.get_reals(prefix + ".anchor", {});
  p.normal = c.get_reals(prefix + ".normal", {});
  if (p.anchor.empty()) c.fail(prefix + ".anchor", "missing required field");
  if (p.normal.empty()) c.fail(prefix + ".normal", "missing required field");
  if (p.anchor.size() != p.normal.size()) c.fail(prefix + ".normal", "dimension differs from anchor");
  return p;
}

}  // namespace

RunSettings build_run_settings(const ScenarioConfig& c, const RunOverrides& o) {
  RunSettings r;
  r.kind = c.require("scenario");
  if (!kind_info(r.kind)) c.fail("scenario", "unknown scenario kind '" + r.kind + "'");
  for (const auto& e : c.entries())
    if (!allowed(r.kind, e.key)) c.fail(e, "not a field of scenario '" + r.kind + "'");

  if (o.seed) {
    r.seed = *o.seed;
  } else if (c.has("seed")) {
    const long s = c.get_int("seed", 1);
    if (s < 0) c.fail("seed", "must be nonnegative");
    r.seed = static_cast<std::uint64_t>(s);
  } else if (const char* env = std::getenv("LAYERED_OT_SEED")) {
    char* end = nullptr;
    const unsigned long long s = std::strtoull(env, &end, 10);
    if (*env == '\0' || *end != '\0') throw ConfigError("LAYERED_OT_SEED: expected an integer");
    r.seed = s;
  }
  const CostModel cost = parse_cost(c);
  const ProbeSettings probe = parse_probe(c, r.seed, o);
  r.output.dir = c.get_string("output.dir", "");
  r.output.plan = c.get_bool("output.plan", true);
  r.output.duals = c.get_bool("output.duals", true);
  r.output.plot = c.get_bool("output.plot", true);
  r.output.details = c.get_bool("output.details", true);

  const std::string& k = r.kind;
  if (k == "t31_layered") {
    LayeredRun run;
    run.cost = cost;
    run.probe = probe;
    run.expect = parse_expect(c, Expectation::hypotheses_hold);
    auto& s = run.scenario;
    s.n = positive_int(c, "geometry.n", 1);
    s.K = positive_int(c, "geometry.K", 2);
    s.grid = positive_int(c, "geometry.grid", 20);
    s.target_grid = positive_int(c, "geometry.target_grid", std::max(1, s.grid / 5));
    s.offsets = c.get_reals("geometry.offsets", {});
    s.source_offset = c.get_real("geometry.source_offset", 0.0);
    s.t = masses(c, "measure.t");
    s.perturb = perturbation(c);
    s.amplitude = unit_interval(c, "measure.amplitude", 0.3, true);
    s.jitter = unit_interval(c, "measure.jitter", 0.0, false);
    s.atomic_first_layer = c.get_bool("measure.atomic_first_layer", false);
    s.seed = r.seed;
    run.twist_samples = positive_int(c, "checks.twist_samples", 100);
    run.cycle_samples = positive_int(c, "checks.cycle_samples", 10000);
    r.spec = run;
  } else if (k == "t32_tilted") {
    TiltedRun run;
    run.cost = cost;
    run.probe = probe;
    run.expect = parse_expect(c, Expectation::hypotheses_hold);
    auto& s = run.scenario;
    s.n = positive_int(c, "geometry.n", 1);
    s.grid = positive_int(c, "geometry.grid", 20);
    s.target_grid = positive_int(c, "geometry.target_grid", std::max(1, s.grid / 5));
    s.source = parse_plane(c, "geometry.source");
    const int layers = positive_int(c, "geometry.layers", 2);
    for (int l = 1; l <= layers; ++l) s.layers.push_back(parse_plane(c, "geometry.layer" + std::to_string(l)));
    for (const auto& e : c.entries())
      if (e.key.rfind("geometry.layer", 0) == 0 && e.key != "geometry.layers") {
        const int idx = std::atoi(e.key.c_str() + 14);
        if (idx < 1 || idx > layers) c.fail(e, "layer index beyond geometry.layers");
      }
    s.t = masses(c, "measure.t");
    s.perturb = perturbation(c);
    s.amplitude = unit_interval(c, "measure.amplitude", 0.3, true);
    s.jitter = unit_interval(c, "measure.jitter", 0.0, false);
    s.seed = r.seed;
    run.twist_samples = positive_int(c, "checks.twist_samples", 100);
    run.cycle_samples = positive_int(c, "checks.cycle_samples", 10000);
    r.spec = run;
  } else if (k == "t41_threemarginal") {
    ThreeMarginalRun run;
    run.cost = cost;
    run.probe = probe;
    run.expect = parse_expect(c, Expectation::hypotheses_hold);
    auto& s = run.scenario;
    s.n = positive_int(c, "geometry.n", 1);
    s.K = positive_int(c, "geometry.K", 2);
    s.L = positive_int(c, "geometry.L", 2);
    s.grid = positive_int(c, "geometry.grid", 12);
    s.target_grid = positive_int(c, "geometry.target_grid", 3);
    s.y_offsets = c.get_reals("geometry.y_offsets", {});
    s.z_offsets = c.get_reals("geometry.z_offsets", {});
    s.t = masses(c, "measure.t");
    s.s = masses(c, "measure.s");
    s.perturb = perturbation(c);
    s.amplitude = unit_interval(c, "measure.amplitude", 0.3, true);
    s.jitter = unit_interval(c, "measure.jitter", 0.5, false);
    s.seed = r.seed;
    run.twist_samples = positive_int(c, "checks.twist_samples", 100);
    r.spec = run;
  } else if (k == "t53_subtwist") {
    SubtwistRun run;
    run.cost = cost;
    run.probe = probe;
    run.expect = parse_expect(c, Expectation::hypotheses_hold);
    run.shape = parse_shape(c);
    run.grid = positive_int(c, "geometry.grid", 16);
    run.mixed = parse_mixed(c, r.seed);
    run.targets = positive_int(c, "targets.count", 40);
    run.box = positive_real(c, "targets.box", 2.0);
    run.seed = r.seed;
    run.chart_nodes = positive_int(c, "checks.chart_nodes", 360);
    run.pair_samples = positive_int(c, "checks.pair_samples", 200);
    run.cycle_samples = positive_int(c, "checks.cycle_samples", 10000);
    r.spec = run;
  } else if (k == "t61_boundary") {
    BoundaryRun run;
    run.cost = cost;
    run.probe = probe;
    run.expect = parse_expect(c, Expectation::hypotheses_hold);
    run.theorem = parse_with<TheoremId>(c, "theorem", TheoremId::C6_2, &parse_theorem_id);
    if (run.theorem != TheoremId::T6_1 && run.theorem != TheoremId::C6_2)
      c.fail("theorem", "t61_boundary exercises T6.1 or C6.2");
    run.shape = parse_shape(c);
    run.grid = positive_int(c, "geometry.grid", 24);
    run.mixed = parse_mixed(c, r.seed);
    const std::string interior = c.get_string("fan.interior", "dilated");
    if (interior == "dilated")
      run.fan.interior = FanInterior::dilated;
    else if (interior == "shared")
      run.fan.interior = FanInterior::shared;
    else
      c.fail("fan.interior", "expected dilated or shared");
    run.fan.dilation = positive_real(c, "fan.dilation", run.fan.dilation);
    run.fan.r_min = positive_real(c, "fan.r_min", run.fan.r_min);
    run.fan.r_max = positive_real(c, "fan.r_max", run.fan.r_max);
    if (run.fan.r_max < run.fan.r_min) c.fail("fan.r_max", "must be >= fan.r_min");
    run.fan.points_per_ray = positive_int(c, "fan.points_per_ray", run.fan.points_per_ray);
    run.fan.quantized = c.get_bool("fan.quantized", true);
    run.fan.seed = r.seed;
    run.tol_normal = positive_real(c, "checks.tol_normal", 1e-6);
    run.min_interior_single = unit_interval(c, "checks.min_interior_single", 0.95, true);
    r.spec = run;
  } else {
    CounterexampleRun run;
    run.kind = k == "cex_atomic" ? CounterexampleKind::atomic : CounterexampleKind::perpendicular;
    run.probe = probe;
    run.grid = positive_int(c, "geometry.grid", run.kind == CounterexampleKind::atomic ? 100 : 10);
    run.plans = positive_int(c, "checks.plans", 100);
    if (cost.family() != CostFamily::quadratic) c.fail("cost.family", "counterexamples use the quadratic cost");
    r.spec = run;
  }
  if (c.has("theorem") && k != "t61_boundary") c.fail("theorem", "only t61_boundary selects a theorem");
  if (c.has("expect") && (k == "cex_atomic" || k == "cex_perpendicular"))
    c.fail("expect", "counterexample kinds always expect violated hypotheses");
  return r;
}

}  // namespace layered_ot
