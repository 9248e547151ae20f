#include "qpat/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "qpat/error.hpp"

namespace qpat {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("sha256 init failed");
  }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
      out += kHex[md[i] >> 4];
      out += kHex[md[i] & 0xf];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingArtifact, "cannot read " + file.string());
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::string sha256_text(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json j;
  j["tool"] = "qpat";
  j["version"] = std::string(kToolVersion);
  j["config_schema_version"] = kConfigSchemaVersion;
  j["config"] = config;
  j["inputs"] = inputs;
  j["stages"] = stages;
  j["artifacts"] = artifacts;
  j["created_at"] = created_at;
  return j;
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  try {
    Manifest m;
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
    const auto stages = j.value("stages", nlohmann::json::object());
    for (const auto& [k, v] : stages.items()) m.stages[k] = v;
    m.artifacts = j.value("artifacts", std::map<std::string, std::string>{});
    m.created_at = j.value("created_at", "");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedArtifact, std::string("manifest: ") + e.what());
  }
}

nlohmann::json emit_manifest(const Manifest& manifest) { return manifest.to_json(); }

nlohmann::json without_wall_clock(nlohmann::json manifest) {
  manifest.erase("created_at");
  return manifest;
}

}  // namespace qpat
