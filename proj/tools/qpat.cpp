// qpat: command line front-end for the pattern pipeline.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qpat/config.hpp"
#include "qpat/error.hpp"
#include "qpat/fixtures.hpp"
#include "qpat/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

int exit_status(qpat::ErrorClass c) {
  switch (c) {
    case qpat::ErrorClass::Config: return kExitConfig;
    case qpat::ErrorClass::Data: return kExitData;
    case qpat::ErrorClass::Invariant: return kExitInvariant;
  }
  return kExitInvariant;
}

void print_error(std::string_view code, std::string_view klass, std::string_view message) {
  json j = {{"error", {{"code", code}, {"class", klass}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
}

json stage_json(const qpat::StageReport& r) {
  return {{"stage", r.stage}, {"counts", r.counts}, {"artifacts", r.artifacts}, {"warnings", r.warnings}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-filtered OHLC pattern libraries: extraction, scoring, filtering, baselines, backtest"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  std::optional<std::string> out_dir, threads, seed;
  app.add_option("--config", config_file, "Config file (key = value lines)")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker cap (0 = hardware concurrency)");
  app.add_option("--seed", seed, "Random seed for baselines and fixtures");
  app.set_version_flag("--version",
                       "qpat " + std::string(qpat::kToolVersion) +
                           " (config schema " + std::to_string(qpat::kConfigSchemaVersion) + ")");

  std::map<std::string, CLI::Option*> key_options;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  auto* group = app.add_option_group("Config overrides", "Any config key as a flag");
  for (const auto& key : qpat::config_keys()) {
    if (key == "out" || key == "threads" || key == "seed") continue;
    if (qpat::is_switch_key(key)) {
      switches[key] = false;
      key_options[key] = group->add_flag("--" + key + ",!--no-" + key, switches[key], "Set or clear " + key);
    } else {
      values[key];
      key_options[key] = group->add_option("--" + key, values[key], "Override " + key);
    }
  }

  const std::vector<std::string> stages = {"ingest", "extract", "score", "filter",
                                           "baseline", "backtest", "report"};
  std::map<std::string, CLI::App*> stage_cmds;
  for (const auto& s : stages) stage_cmds[s] = app.add_subcommand(s, "Run the " + s + " stage");
  auto* all_cmd = app.add_subcommand("all", "Run every stage in order");
  auto* fixture_cmd = app.add_subcommand("fixture", "Write a synthetic dataset and config into --out");
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a manifest and compare digests");
  std::string manifest_file;
  replay_cmd->add_option("manifest", manifest_file, "manifest.json to replay")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("InvalidArguments", "config", e.what());
    std::cerr << app.get_formatter()->make_help(&app, "qpat", CLI::AppFormatMode::Normal);
    return kExitConfig;
  }

  try {
    if (fixture_cmd->parsed()) {
      std::uint64_t s = 42;
      if (seed) {
        qpat::RunConfig tmp;
        tmp.set("seed", *seed);
        s = tmp.seed;
      }
      const fs::path dir = out_dir ? fs::path(*out_dir) : fs::path("qpat-fixture");
      const auto info = qpat::fixtures::write_market_dataset(dir, s);
      std::cout << json{{"fixture", dir.string()},
                        {"files", {"fixture_train.csv", "fixture_test.csv", "fixture.conf"}},
                        {"train_bars", info.train_bars},
                        {"test_bars", info.test_bars}}
                       .dump(2)
                << '\n';
      return 0;
    }

    if (replay_cmd->parsed()) {
      qpat::RunConfig tmp;
      if (threads) tmp.set("threads", *threads);
      const fs::path dir = out_dir ? fs::path(*out_dir) : fs::path("qpat-replay");
      auto result = qpat::replay(manifest_file, dir, tmp.threads);
      std::cout << json{{"identical", result.identical}, {"differences", result.differences}}.dump(2) << '\n';
      return result.identical ? 0 : kExitInvariant;
    }

    qpat::RunConfig cfg;
    if (!config_file.empty()) cfg = qpat::load_config(config_file);
    for (const auto& [key, opt] : key_options) {
      if (opt->count() == 0) continue;
      if (qpat::is_switch_key(key)) cfg.set(key, switches[key] ? "true" : "false");
      else cfg.set(key, values[key]);
    }
    if (out_dir) cfg.set("out", *out_dir);
    if (threads) cfg.set("threads", *threads);
    if (seed) cfg.set("seed", *seed);

    qpat::Pipeline pipeline(cfg);
    json out = json::array();
    auto emit = [&](const qpat::StageReport& r) {
      for (const auto& w : r.warnings) std::cerr << "warning: " << r.stage << ": " << w << '\n';
      out.push_back(stage_json(r));
    };
    if (all_cmd->parsed()) {
      for (const auto& r : pipeline.all()) emit(r);
    } else {
      for (const auto& [name, cmd] : stage_cmds)
        if (cmd->parsed()) emit(pipeline.run(name));
    }
    std::cout << out.dump(2) << '\n';
    return 0;
  } catch (const qpat::Error& e) {
    const auto klass = qpat::classify(e.code());
    const char* names[] = {"config", "data", "invariant"};
    print_error(qpat::to_string(e.code()), names[static_cast<int>(klass)], e.what());
    return exit_status(klass);
  } catch (const std::exception& e) {
    print_error("Internal", "invariant", e.what());
    return kExitInvariant;
  }
}
