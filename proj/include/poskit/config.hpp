#pragma once

// Run configuration: a TOML-subset file (tables, key = value, strings,
// integers, floats, booleans, arrays, comments) plus key=value overrides.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poskit/corpus_adapters.hpp"
#include "poskit/eval_grid.hpp"
#include "poskit/eval_runner.hpp"

namespace poskit {

struct ConfigValue {
  enum class Type { Bool, Int, Float, String, Array };
  Type type = Type::String;
  bool boolean = false;
  std::int64_t integer = 0;
  double floating = 0.0;
  std::string string;
  std::vector<ConfigValue> array;

  static ConfigValue of(bool v);
  static ConfigValue of(std::int64_t v);
  static ConfigValue of(double v);
  static ConfigValue of(std::string v);
  static ConfigValue of(std::vector<ConfigValue> v);

  /// TOML literal form.
  std::string render() const;

  friend bool operator==(const ConfigValue&, const ConfigValue&) = default;
};

/// Flat map from dotted keys ("grid.lengths") to values.
class ConfigTable {
 public:
  void set(const std::string& key, ConfigValue value);
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const ConfigValue* find(const std::string& key) const;
  const std::map<std::string, ConfigValue>& values() const { return values_; }

  /// Applies "key=value"; the value is parsed as a TOML literal, falling back
  /// to a bare string.
  void apply_override(std::string_view assignment);

  /// Grouped by table, keys sorted.
  std::string to_toml() const;

 private:
  std::map<std::string, ConfigValue> values_;
};

/// Throws Config with the origin and line number on malformed input.
ConfigTable parse_config(std::string_view text, std::string_view origin = "<config>");
ConfigTable load_config(const std::filesystem::path& path);
ConfigValue parse_config_value(std::string_view text);

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = "poskit-out";
  GridSpec grid;
  MixtureConfig mixture;
  BackendConfig backend;
  std::filesystem::path cache_dir;  // defaults to <output_dir>/cache
  std::vector<std::filesystem::path> adapted_corpora;
  std::vector<std::filesystem::path> code_corpora;
  CorpusFieldMap corpus_fields;
  int pyindex_per_category = 20;
  bool reasoning_comparison = false;

  std::filesystem::path resolved_cache_dir() const;
};

/// Rejects unknown keys and mistyped values with Config errors. The seed is
/// propagated to the grid and mixture.
RunConfig resolve_run_config(const ConfigTable& table);

/// Throws Config("seed required") when no seed was given.
std::uint64_t require_seed(const RunConfig& config);

/// Every effective setting, suitable for re-running the command.
ConfigTable snapshot(const RunConfig& config);

}  // namespace poskit
