#include "qpat/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "qpat/artifacts.hpp"
#include "qpat/backtest.hpp"
#include "qpat/baselines.hpp"
#include "qpat/error.hpp"
#include "qpat/report.hpp"

namespace qpat {

namespace fs = std::filesystem;
using nlohmann::json;
namespace names = artifact_names;

namespace {

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingArtifact, "missing file: " + p.string());
  return in;
}

template <class Fn>
void write_file(const fs::path& p, Fn&& fn) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::MissingArtifact, "cannot write " + p.string());
  fn(out);
  if (!out) throw Error(ErrorCode::MissingArtifact, "write failed: " + p.string());
}

void write_json(const fs::path& p, const json& j) {
  write_file(p, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

json read_json(const fs::path& p) {
  auto in = open_in(p);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedArtifact, p.string() + ": " + e.what());
  }
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<FeatureVector> features(const std::vector<ScoredPattern>& v) {
  std::vector<FeatureVector> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.pattern.features);
  return out;
}

std::vector<Pattern> patterns_of(const std::vector<ScoredPattern>& v) {
  std::vector<Pattern> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.pattern);
  return out;
}

json histogram_json(const DistanceHistogram& h) {
  return {{"samples", h.samples}, {"mean", h.mean}, {"median", h.median}, {"min", h.min}, {"max", h.max}};
}

}  // namespace

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) { config_.validate(); }

fs::path Pipeline::path(std::string_view name) const { return config_.out / std::string(name); }

fs::path Pipeline::require(std::string_view name) const {
  auto p = path(name);
  if (!fs::exists(p))
    throw Error(ErrorCode::MissingArtifact, "missing upstream artifact " + p.string() + " (run the earlier stage first)");
  return p;
}

void Pipeline::record(StageReport& report) {
  const auto mpath = path(names::kManifest);
  Manifest m;
  if (fs::exists(mpath)) m = Manifest::from_json(read_json(mpath));
  m.config = config_.to_map();
  for (const auto& [k, v] : report.inputs) m.inputs[k] = v;
  m.stages[report.stage] = report.counts;
  for (const auto& a : report.artifacts) m.artifacts[a] = sha256_file(path(a));
  m.created_at = utc_now();
  write_json(mpath, emit_manifest(m));
}

StageReport Pipeline::ingest() {
  StageReport r;
  r.stage = "ingest";
  if (config_.train.empty()) throw Error(ErrorCode::InvalidConfig, "no train files configured (key 'train')");
  fs::create_directories(config_.out);

  auto load = [&](const std::vector<fs::path>& files, std::string_view what, std::string_view out_name) {
    std::vector<BarSeries> parts;
    std::size_t minute_bars = 0;
    for (const auto& f : files) {
      auto in = open_in(f);
      try {
        parts.push_back(parse_histdata_csv(in, config_.symbol));
      } catch (const Error& e) {
        throw Error(e.code(), f.string() + ": " + e.what());
      }
      minute_bars += parts.back().size();
      r.inputs[f.string()] = sha256_file(f);
    }
    auto merged = concat(std::move(parts));
    auto bars = aggregate(merged, config_.interval, AggregateOptions{config_.drop_partial});
    write_file(path(out_name), [&](std::ostream& out) { write_bars_csv(out, bars); });
    r.artifacts.emplace_back(out_name);
    r.counts[std::string(what) + "_minute_bars"] = minute_bars;
    r.counts[std::string(what) + "_bars"] = bars.size();
  };
  load(config_.train, "train", names::kBarsTrain);
  if (!config_.test.empty()) load(config_.test, "test", names::kBarsTest);
  record(r);
  return r;
}

StageReport Pipeline::extract() {
  StageReport r;
  r.stage = "extract";
  auto in = open_in(require(names::kBarsTrain));
  auto bars = read_bars_csv(in, config_.interval, config_.symbol);
  auto patterns = extract_patterns(bars, config_.labeling);
  write_file(path(names::kPatterns), [&](std::ostream& out) { artifacts::write_patterns_csv(out, patterns); });
  write_json(path(names::kPatternsJson), artifacts::patterns_to_json(patterns));
  std::size_t buys = 0;
  for (const auto& p : patterns)
    if (p.label == Label::Buy) ++buys;
  r.counts = {{"patterns", patterns.size()}, {"buys", buys}, {"sells", patterns.size() - buys}};
  r.artifacts = {names::kPatterns, names::kPatternsJson};
  record(r);
  return r;
}

StageReport Pipeline::score() {
  StageReport r;
  r.stage = "score";
  auto in = open_in(require(names::kPatterns));
  auto patterns = artifacts::read_patterns_csv(in);
  auto cfg = config_.scoring;
  cfg.threads = config_.threads;
  auto scored = score_all(patterns, cfg);
  write_file(path(names::kScored), [&](std::ostream& out) { artifacts::write_scored_csv(out, scored); });
  r.counts = {{"scored", scored.size()}, {"h_global", global_entropy(patterns)}};
  r.artifacts = {names::kScored};
  record(r);
  return r;
}

StageReport Pipeline::filter() {
  StageReport r;
  r.stage = "filter";
  auto in = open_in(require(names::kScored));
  auto scored = artifacts::read_scored_csv(in);
  FilterConfig cfg{0.0, config_.scoring};
  cfg.theta = config_.theta ? *config_.theta : default_theta(patterns_of(scored));
  auto lib = qpat::filter(scored, cfg);
  auto report = verify(lib);
  write_file(path(names::kFiltered), [&](std::ostream& out) { artifacts::write_filtered_csv(out, lib); });
  auto summary = artifacts::filter_summary(lib, report);
  summary["theta_source"] = config_.theta ? "config" : "p5-cross-distance";
  write_json(path(names::kFilterSummary), summary);
  r.counts = summary["counts"];
  r.counts["theta"] = cfg.theta;
  r.counts["verify_passed"] = report.passed;
  r.artifacts = {names::kFiltered, names::kFilterSummary};
  record(r);
  if (!report.passed) {
    std::ostringstream msg;
    msg << "filtered library violates cross-class separation: min distance " << report.min_cross_distance
        << " < theta " << cfg.theta;
    throw Error(ErrorCode::InvariantViolation, msg.str());
  }
  return r;
}

namespace {

FilteredLibrary load_library(const fs::path& filtered, const fs::path& summary) {
  auto cfg = artifacts::filter_config_from_summary(read_json(summary));
  auto in = open_in(filtered);
  return artifacts::read_filtered_csv(in, cfg);
}

}  // namespace

StageReport Pipeline::baseline() {
  StageReport r;
  r.stage = "baseline";
  auto pin = open_in(require(names::kPatterns));
  auto raw = artifacts::read_patterns_csv(pin);
  auto lib = load_library(require(names::kFiltered), require(names::kFilterSummary));

  const auto x = Matrix::from_features(raw);
  auto km = kmeans(x, 2, config_.seed);
  auto gm = gmm_em(x, 2, config_.seed);
  auto pca = pca_project(x);
  auto rows = balance_report(lib, km, gm.assignment, raw);

  std::vector<Pattern> kept = patterns_of(lib.buys);
  for (const auto& s : lib.sells) kept.push_back(s.pattern);
  auto kept_xy = project(pca, Matrix::from_features(kept));

  json j;
  j["schema_version"] = artifacts::kSchemaVersion;
  j["seed"] = config_.seed;
  j["balance"] = artifacts::balance_to_json(rows);
  j["kmeans"] = {{"iterations", km.iterations}, {"converged", km.converged}, {"objective", km.trace.back()}};
  j["gmm"] = {{"iterations", gm.assignment.iterations},
              {"converged", gm.assignment.converged},
              {"log_likelihood", gm.assignment.trace.back()},
              {"weights", gm.weights}};
  j["pca"] = {{"explained_variance", pca.explained_variance}, {"degenerate_rank", pca.degenerate_rank}};
  write_json(path("baseline.json"), j);
  write_file(path("baseline.txt"), [&](std::ostream& out) { out << format_balance_table(rows); });
  write_file(path("projection_raw.csv"),
             [&](std::ostream& out) { artifacts::write_projection_csv(out, raw, pca.coordinates); });
  write_file(path("projection_filtered.csv"),
             [&](std::ostream& out) { artifacts::write_projection_csv(out, kept, kept_xy); });

  for (const auto& row : rows) r.counts[row.method] = {{"buy", row.buys}, {"sell", row.sells}, {"ratio", row.ratio}};
  if (pca.degenerate_rank) r.warnings.push_back("PCA: second singular value is negligible (rank < 2)");
  r.artifacts = {"baseline.json", "baseline.txt", "projection_raw.csv", "projection_filtered.csv"};
  record(r);
  return r;
}

StageReport Pipeline::backtest() {
  StageReport r;
  r.stage = "backtest";
  auto bin = open_in(require(names::kBarsTest));
  auto bars = read_bars_csv(bin, config_.interval, config_.symbol);
  auto lib = load_library(require(names::kFiltered), require(names::kFilterSummary));

  auto cfg = config_.backtest;
  cfg.match_theta = config_.match_theta ? *config_.match_theta : lib.config.theta;
  auto result = run_backtest(bars, lib, cfg);
  auto sweep = parameter_sweep(bars, lib, cfg, config_.sweep_targets, config_.sweep_stops, config_.threads);

  write_file(path("trades.csv"), [&](std::ostream& out) { artifacts::write_trades_csv(out, result.trades); });
  write_file(path("equity.csv"), [&](std::ostream& out) { artifacts::write_equity_csv(out, result.equity); });
  auto summary = artifacts::summary_to_json(result.equity.summary);
  summary["target"] = cfg.target;
  summary["stop"] = cfg.stop;
  summary["match_theta"] = cfg.match_theta;
  write_json(path("backtest_summary.json"), summary);
  write_json(path("sweep.json"), artifacts::sweep_to_json(sweep));

  r.counts = summary;
  r.warnings = result.warnings;
  r.artifacts = {"trades.csv", "equity.csv", "backtest_summary.json", "sweep.json"};
  record(r);
  return r;
}

StageReport Pipeline::report() {
  StageReport r;
  r.stage = "report";
  auto tin = open_in(require(names::kBarsTrain));
  auto bars = read_bars_csv(tin, config_.interval, config_.symbol);
  if (fs::exists(path(names::kBarsTest))) {
    auto sin = open_in(path(names::kBarsTest));
    auto test = read_bars_csv(sin, config_.interval, config_.symbol);
    bars = concat({std::move(bars), std::move(test)});
  }
  auto pin = open_in(require(names::kPatterns));
  auto raw = artifacts::read_patterns_csv(pin);
  auto lib = load_library(require(names::kFiltered), require(names::kFilterSummary));

  std::vector<FeatureVector> raw_buys, raw_sells, raw_all;
  for (const auto& p : raw) {
    (p.label == Label::Buy ? raw_buys : raw_sells).push_back(p.features);
    raw_all.push_back(p.features);
  }
  const auto kept_buys = features(lib.buys), kept_sells = features(lib.sells);

  DistanceHistogram h_raw, h_filtered;
  if (config_.all_pairs_histogram) {
    auto kept_all = kept_buys;
    kept_all.insert(kept_all.end(), kept_sells.begin(), kept_sells.end());
    h_raw = all_pairs_distance_histogram(raw_all, config_.bins, Population::Raw);
    h_filtered = all_pairs_distance_histogram(kept_all, config_.bins, Population::Filtered);
  } else {
    h_raw = cross_distance_histogram(raw_buys, raw_sells, config_.bins, Population::Raw);
    h_filtered = cross_distance_histogram(kept_buys, kept_sells, config_.bins, Population::Filtered);
  }
  const auto shift = compare(h_raw, h_filtered);
  auto vol = monthly_volatility(bars, config_.sample_std);

  write_file(path("histogram_raw.csv"), [&](std::ostream& out) { write_histogram_csv(out, h_raw); });
  write_file(path("histogram_filtered.csv"), [&](std::ostream& out) { write_histogram_csv(out, h_filtered); });
  json hs = {{"mode", config_.all_pairs_histogram ? "all-pairs" : "cross-label"},
             {"raw", histogram_json(h_raw)},
             {"filtered", histogram_json(h_filtered)},
             {"mean_delta", shift.mean_delta},
             {"median_delta", shift.median_delta}};
  write_json(path("histogram_summary.json"), hs);
  write_file(path("volatility.csv"), [&](std::ostream& out) { write_volatility_csv(out, vol); });
  write_file(path("histogram_raw.svg"),
             [&](std::ostream& out) { out << histogram_svg(h_raw, "Pairwise L1 distance, raw patterns"); });
  write_file(path("histogram_filtered.svg"),
             [&](std::ostream& out) { out << histogram_svg(h_filtered, "Pairwise L1 distance, filtered patterns"); });
  write_file(path("volatility.svg"),
             [&](std::ostream& out) { out << volatility_svg(vol, "Monthly std of open prices"); });

  r.counts = {{"mean_delta", shift.mean_delta},
              {"median_delta", shift.median_delta},
              {"raw_pairs", h_raw.samples},
              {"filtered_pairs", h_filtered.samples},
              {"years", vol.years.size()}};
  r.artifacts = {"histogram_raw.csv", "histogram_filtered.csv", "histogram_summary.json", "volatility.csv",
                 "histogram_raw.svg", "histogram_filtered.svg", "volatility.svg"};
  record(r);
  return r;
}

std::vector<StageReport> Pipeline::all() {
  std::vector<StageReport> out;
  out.push_back(ingest());
  out.push_back(extract());
  out.push_back(score());
  out.push_back(filter());
  out.push_back(baseline());
  if (!config_.test.empty()) out.push_back(backtest());
  out.push_back(report());
  return out;
}

StageReport Pipeline::run(std::string_view stage) {
  if (stage == "ingest") return ingest();
  if (stage == "extract") return extract();
  if (stage == "score") return score();
  if (stage == "filter") return filter();
  if (stage == "baseline") return baseline();
  if (stage == "backtest") return backtest();
  if (stage == "report") return report();
  throw Error(ErrorCode::InvalidConfig, "unknown stage '" + std::string(stage) + "'");
}

ReplayResult replay(const fs::path& manifest_file, const fs::path& out_dir, unsigned threads) {
  const auto recorded = Manifest::from_json(read_json(manifest_file));
  RunConfig cfg;
  for (const auto& [k, v] : recorded.config) cfg.set(k, v);
  cfg.out = out_dir;
  cfg.threads = threads;

  fs::remove(out_dir / names::kManifest);
  Pipeline pipeline(cfg);
  pipeline.all();
  const auto fresh = Manifest::from_json(read_json(out_dir / names::kManifest));

  ReplayResult result;
  auto diff = [&](const std::string& what) {
    result.identical = false;
    result.differences.push_back(what);
  };
  for (const auto& [path, digest] : recorded.inputs) {
    auto it = fresh.inputs.find(path);
    if (it == fresh.inputs.end() || it->second != digest) diff("input " + path);
  }
  for (const auto& [stage, counts] : recorded.stages) {
    auto it = fresh.stages.find(stage);
    if (it == fresh.stages.end() || it->second != counts) diff("stage " + stage);
  }
  for (const auto& [name, digest] : recorded.artifacts) {
    auto it = fresh.artifacts.find(name);
    if (it == fresh.artifacts.end() || it->second != digest) diff("artifact " + name);
  }
  return result;
}

}  // namespace qpat
