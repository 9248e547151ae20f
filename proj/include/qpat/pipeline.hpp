#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpat/config.hpp"
#include "qpat/manifest.hpp"

namespace qpat {

/// File names of stage artifacts inside the output directory.
namespace artifact_names {
inline constexpr const char* kBarsTrain = "bars_train.csv";
inline constexpr const char* kBarsTest = "bars_test.csv";
inline constexpr const char* kPatterns = "patterns.csv";
inline constexpr const char* kPatternsJson = "patterns.json";
inline constexpr const char* kScored = "scored.csv";
inline constexpr const char* kFiltered = "filtered.csv";
inline constexpr const char* kFilterSummary = "filter_summary.json";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace artifact_names

struct StageReport {
  std::string stage;
  nlohmann::json counts = nlohmann::json::object();
  std::vector<std::string> artifacts;
  std::map<std::string, std::string> inputs;  // input path -> sha256
  std::vector<std::string> warnings;
};

/// Stage runner. Each stage reads its upstream artifacts from the output
/// directory, writes its own, and folds its counts and artifact digests into
/// manifest.json. A missing upstream artifact raises MissingArtifact.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config);

  StageReport ingest();
  StageReport extract();
  StageReport score();
  StageReport filter();
  StageReport baseline();
  StageReport backtest();
  StageReport report();

  /// Chains every stage; backtest is skipped when no test data is configured.
  std::vector<StageReport> all();

  StageReport run(std::string_view stage);

  const RunConfig& config() const { return config_; }
  std::filesystem::path path(std::string_view name) const;

 private:
  void record(StageReport& report);
  std::filesystem::path require(std::string_view name) const;

  RunConfig config_;
};

struct ReplayResult {
  bool identical = true;
  std::vector<std::string> differences;
};

/// Re-runs `all` from a manifest's config into out_dir and compares stage
/// counts and artifact digests with the recorded ones.
ReplayResult replay(const std::filesystem::path& manifest_file, const std::filesystem::path& out_dir,
                    unsigned threads = 0);

}  // namespace qpat
