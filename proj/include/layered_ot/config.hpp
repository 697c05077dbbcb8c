#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "layered_ot/uniqueness.hpp"

namespace layered_ot {

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Flat `key = value` file. Blank lines and `#` comments are ignored; a key
/// may appear once.
class ScenarioConfig {
 public:
  ScenarioConfig() = default;
  ScenarioConfig(std::string source, std::vector<ConfigEntry> entries);

  const std::string& source() const { return source_; }
  const std::vector<ConfigEntry>& entries() const { return entries_; }
  const ConfigEntry* find(const std::string& key) const;
  bool has(const std::string& key) const { return find(key) != nullptr; }

  /// Required string; ConfigError naming the field when missing.
  std::string require(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long get_int(const std::string& key, long fallback) const;
  double get_real(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma- or space-separated reals.
  std::vector<double> get_reals(const std::string& key, const std::vector<double>& fallback) const;

  /// ConfigError with `source:line: field 'key': message`.
  [[noreturn]] void fail(const ConfigEntry& e, const std::string& message) const;
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  std::string source_;
  std::vector<ConfigEntry> entries_;
};

ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
/// Throws ConfigError when the file cannot be read.
ScenarioConfig load_config(const std::string& path);

struct ScenarioKindInfo {
  std::string name;
  std::string theorem;
  std::string description;
};

/// Built-in scenario kinds in a fixed order.
const std::vector<ScenarioKindInfo>& scenario_registry();
/// One `name<TAB>theorem<TAB>description` line per kind.
std::string list_scenarios();

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> tol_face;
};

struct OutputOptions {
  /// Empty: no files are written.
  std::string dir;
  bool plan = true;
  bool duals = true;
  bool plot = true;
  bool details = true;
};

struct RunSettings {
  std::string kind;
  std::uint64_t seed = 1;
  ScenarioSpec spec;
  OutputOptions output;
};

/// Seed precedence: override, `seed` key, LAYERED_OT_SEED, 1. Validates the
/// keys against the kind's schema.
RunSettings build_run_settings(const ScenarioConfig& cfg, const RunOverrides& overrides = {});

}  // namespace layered_ot
