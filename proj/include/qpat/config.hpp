#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qpat/backtest.hpp"
#include "qpat/pattern.hpp"
#include "qpat/quality_filter.hpp"

namespace qpat {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr int kConfigSchemaVersion = 1;

/// Everything a pipeline run depends on. Text form is one `key = value` per
/// line with `#` comments; the same keys are accepted as `--key` flags.
struct RunConfig {
  std::string symbol = "XAUUSD";
  std::vector<std::filesystem::path> train;
  std::vector<std::filesystem::path> test;
  int interval = 30;
  bool drop_partial = false;

  LabelingConfig labeling;
  ScoringConfig scoring;
  std::optional<double> theta;        // unset: 5th percentile of cross distances
  std::optional<double> match_theta;  // unset: theta
  BacktestConfig backtest{.target = 15.0, .stop = 10.0, .initial_capital = 10000.0, .point_value = 10.0};
  std::vector<double> sweep_targets = {10.0, 15.0, 20.0};
  std::vector<double> sweep_stops = {5.0, 10.0, 15.0};

  int bins = 40;
  bool all_pairs_histogram = false;
  bool sample_std = false;

  std::uint64_t seed = 42;
  std::filesystem::path out = "qpat-out";
  unsigned threads = 0;

  /// Sets one key from its text value. Throws InvalidConfig for unknown keys
  /// or unparsable values. Relative paths resolve against base_dir.
  void set(std::string_view key, std::string_view value, const std::filesystem::path& base_dir = {});

  /// Checks cross-field invariants. Throws InvalidConfig.
  void validate() const;

  /// Canonical key/value view, sorted by key. Keys that cannot change any
  /// artifact (out, threads) are left out unless include_runtime.
  std::map<std::string, std::string> to_map(bool include_runtime = false) const;

  std::string to_text() const;
};

/// Every recognized key, in documentation order.
const std::vector<std::string>& config_keys();

/// Keys that are boolean switches.
bool is_switch_key(std::string_view key);

/// Parses config text on top of the defaults.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& file);

}  // namespace qpat
