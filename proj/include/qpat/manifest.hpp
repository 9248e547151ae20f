#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpat/config.hpp"

namespace qpat {

/// Hex SHA-256 of a file's bytes. Throws MissingArtifact when unreadable.
std::string sha256_file(const std::filesystem::path& file);
std::string sha256_text(std::string_view data);

/// Run record: config, input digests, per-stage counts, artifact digests and
/// tool version. Everything except `created_at` is a pure function of the
/// inputs and config.
struct Manifest {
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> inputs;     // path -> sha256
  std::map<std::string, nlohmann::json> stages;  // stage -> counts
  std::map<std::string, std::string> artifacts;  // file name -> sha256
  std::string created_at;

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
};

/// Builds the manifest JSON for a run.
nlohmann::json emit_manifest(const Manifest& manifest);

/// The manifest with its wall-clock field removed, for comparisons.
nlohmann::json without_wall_clock(nlohmann::json manifest);

}  // namespace qpat
