#include "qpat/artifacts.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "qpat/error.hpp"
#include "qpat/text.hpp"

namespace qpat::artifacts {

using nlohmann::json;
using text::format_double;

namespace {

constexpr std::size_t kPatternColumns = 4 + kFeatureCount;
constexpr std::size_t kScoredColumns = kPatternColumns + 4;
constexpr std::size_t kFilteredColumns = kScoredColumns + 2;

[[noreturn]] void bad_row(std::size_t line_no, std::string_view why) {
  std::ostringstream msg;
  msg << "artifact line " << line_no << ": " << why;
  throw Error(ErrorCode::MalformedArtifact, msg.str());
}

void write_pattern_header(std::ostream& out) {
  out << "id,origin_iso8601,label,pnl_raw";
  for (std::size_t i = 0; i < kFeatureCount; ++i) out << ",f" << i;
}

void write_pattern_fields(std::ostream& out, const Pattern& p) {
  out << p.id << ',' << format_iso8601(p.origin) << ',' << to_string(p.label) << ',' << format_double(p.pnl_raw);
  for (double f : p.features) out << ',' << format_double(f);
}

void write_score_fields(std::ostream& out, const ScoredPattern& s) {
  out << ',' << format_double(s.h_local) << ',' << format_double(s.info_gain) << ','
      << format_double(s.pnl_norm) << ',' << format_double(s.score);
}

double number(std::string_view field, std::size_t line_no) {
  auto v = text::parse_double(field);
  if (!v) bad_row(line_no, "bad number '" + std::string(field) + "'");
  return *v;
}

Pattern parse_pattern(const std::vector<std::string_view>& f, std::size_t line_no) {
  Pattern p;
  auto id = text::parse_int(f[0]);
  if (!id) bad_row(line_no, "bad id");
  p.id = *id;
  p.origin = parse_iso8601(f[1]);
  auto label = parse_label(text::trim(f[2]));
  if (!label) bad_row(line_no, "bad label");
  p.label = *label;
  p.pnl_raw = number(f[3], line_no);
  for (std::size_t i = 0; i < kFeatureCount; ++i) p.features[i] = number(f[4 + i], line_no);
  return p;
}

// Calls row(fields, line_no) for each data line with exactly `columns` fields.
template <class Fn>
void for_each_row(std::istream& in, std::size_t columns, Fn&& row) {
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    auto v = text::trim(line);
    if (v.empty() || v.front() == '#') continue;
    if (header) {
      header = false;
      if (v.rfind("id,", 0) == 0) continue;
    }
    auto f = text::split(v, ',');
    if (f.size() != columns) {
      std::ostringstream msg;
      msg << "expected " << columns << " columns, got " << f.size();
      bad_row(line_no, msg.str());
    }
    row(f, line_no);
  }
}

ScoredPattern parse_scored(const std::vector<std::string_view>& f, std::size_t line_no) {
  ScoredPattern s;
  s.pattern = parse_pattern(f, line_no);
  s.h_local = number(f[kPatternColumns + 0], line_no);
  s.info_gain = number(f[kPatternColumns + 1], line_no);
  s.pnl_norm = number(f[kPatternColumns + 2], line_no);
  s.score = number(f[kPatternColumns + 3], line_no);
  return s;
}

}  // namespace

void write_patterns_csv(std::ostream& out, std::span<const Pattern> patterns) {
  write_pattern_header(out);
  out << '\n';
  for (const auto& p : patterns) {
    write_pattern_fields(out, p);
    out << '\n';
  }
}

std::vector<Pattern> read_patterns_csv(std::istream& in) {
  std::vector<Pattern> out;
  for_each_row(in, kPatternColumns, [&](const auto& f, std::size_t n) { out.push_back(parse_pattern(f, n)); });
  return out;
}

json patterns_to_json(std::span<const Pattern> patterns) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["feature_layout"] = "bar-major (H-L, C-O, H-O, O-L) x 8";
  json arr = json::array();
  for (const auto& p : patterns) {
    arr.push_back({{"id", p.id},
                   {"origin", format_iso8601(p.origin)},
                   {"label", to_string(p.label)},
                   {"pnl_raw", p.pnl_raw},
                   {"features", p.features}});
  }
  doc["patterns"] = std::move(arr);
  return doc;
}

std::vector<Pattern> patterns_from_json(const json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != kSchemaVersion)
      throw Error(ErrorCode::MalformedArtifact, "unsupported pattern schema_version");
    std::vector<Pattern> out;
    for (const auto& item : doc.at("patterns")) {
      Pattern p;
      p.id = item.at("id").get<std::int64_t>();
      p.origin = parse_iso8601(item.at("origin").get<std::string>());
      auto label = parse_label(item.at("label").get<std::string>());
      if (!label) throw Error(ErrorCode::MalformedArtifact, "bad label in pattern json");
      p.label = *label;
      p.pnl_raw = item.at("pnl_raw").get<double>();
      const auto& f = item.at("features");
      if (f.size() != kFeatureCount) throw Error(ErrorCode::MalformedArtifact, "pattern json needs 32 features");
      for (std::size_t i = 0; i < kFeatureCount; ++i) p.features[i] = f[i].get<double>();
      out.push_back(p);
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedArtifact, std::string("pattern json: ") + e.what());
  }
}

void write_scored_csv(std::ostream& out, std::span<const ScoredPattern> scored) {
  write_pattern_header(out);
  out << ",h_local,info_gain,pnl_norm,score\n";
  for (const auto& s : scored) {
    write_pattern_fields(out, s.pattern);
    write_score_fields(out, s);
    out << '\n';
  }
}

std::vector<ScoredPattern> read_scored_csv(std::istream& in) {
  std::vector<ScoredPattern> out;
  for_each_row(in, kScoredColumns, [&](const auto& f, std::size_t n) { out.push_back(parse_scored(f, n)); });
  return out;
}

void write_filtered_csv(std::ostream& out, const FilteredLibrary& library) {
  write_pattern_header(out);
  out << ",h_local,info_gain,pnl_norm,score,admitted,blocked_by\n";
  for (const auto& d : library.decisions) {
    write_pattern_fields(out, d.item.pattern);
    write_score_fields(out, d.item);
    out << ',' << (d.admitted ? 1 : 0) << ',';
    if (d.blocked_by) out << *d.blocked_by;
    out << '\n';
  }
}

FilteredLibrary read_filtered_csv(std::istream& in, const FilterConfig& config) {
  FilteredLibrary lib;
  lib.config = config;
  for_each_row(in, kFilteredColumns, [&](const auto& f, std::size_t n) {
    FilterDecision d;
    d.item = parse_scored(f, n);
    auto admitted = text::trim(f[kScoredColumns]);
    if (admitted != "0" && admitted != "1") bad_row(n, "admitted must be 0 or 1");
    d.admitted = admitted == "1";
    auto blocked = text::trim(f[kScoredColumns + 1]);
    if (!blocked.empty()) {
      auto id = text::parse_int(blocked);
      if (!id) bad_row(n, "bad blocked_by");
      d.blocked_by = *id;
    }
    const bool buy = d.item.pattern.label == Label::Buy;
    (buy ? lib.provenance.buys_before : lib.provenance.sells_before)++;
    if (d.admitted) (buy ? lib.buys : lib.sells).push_back(d.item);
    lib.decisions.push_back(std::move(d));
  });
  lib.provenance.buys_after = lib.buys.size();
  lib.provenance.sells_after = lib.sells.size();
  return lib;
}

json filter_summary(const FilteredLibrary& library, const VerifyReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["theta"] = library.config.theta;
  j["alpha"] = library.config.scoring.alpha;
  j["k"] = library.config.scoring.k;
  j["normalize_ig"] = library.config.scoring.normalize_ig;
  j["standardize"] = library.config.scoring.standardize;
  j["counts"] = {{"buys_before", library.provenance.buys_before},
                 {"sells_before", library.provenance.sells_before},
                 {"buys_after", library.provenance.buys_after},
                 {"sells_after", library.provenance.sells_after}};
  j["verify"] = {{"passed", report.passed},
                 {"min_cross_distance", report.closest_pair ? json(report.min_cross_distance) : json("inf")}};
  if (report.closest_pair)
    j["verify"]["closest_pair"] = {report.closest_pair->first, report.closest_pair->second};
  return j;
}

FilterConfig filter_config_from_summary(const json& summary) {
  try {
    FilterConfig cfg;
    cfg.theta = summary.at("theta").get<double>();
    cfg.scoring.alpha = summary.at("alpha").get<double>();
    cfg.scoring.k = summary.at("k").get<int>();
    cfg.scoring.normalize_ig = summary.at("normalize_ig").get<bool>();
    cfg.scoring.standardize = summary.at("standardize").get<bool>();
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedArtifact, std::string("filter summary: ") + e.what());
  }
}

void write_trades_csv(std::ostream& out, std::span<const TradeRecord> trades) {
  out << "entry_time,direction,entry_price,exit_time,exit_price,outcome,pnl\n";
  for (const auto& t : trades) {
    out << format_iso8601(t.entry_time) << ',' << to_string(t.direction) << ',' << format_double(t.entry_price)
        << ',' << format_iso8601(t.exit_time) << ',' << format_double(t.exit_price) << ','
        << to_string(t.outcome) << ',' << format_double(t.pnl) << '\n';
  }
}

void write_equity_csv(std::ostream& out, const EquityCurve& curve) {
  out << "time,capital\n";
  for (const auto& p : curve.points) out << format_iso8601(p.time) << ',' << format_double(p.capital) << '\n';
}

json summary_to_json(const EquitySummary& s) {
  return {{"total_return", s.total_return},
          {"trade_count", s.trade_count},
          {"hit_rate", s.hit_rate},
          {"max_drawdown", s.max_drawdown},
          {"final_capital", s.final_capital}};
}

json sweep_to_json(std::span<const SweepCell> cells) {
  json arr = json::array();
  for (const auto& c : cells) {
    auto j = summary_to_json(c.summary);
    j["target"] = c.target;
    j["stop"] = c.stop;
    arr.push_back(std::move(j));
  }
  return {{"schema_version", kSchemaVersion}, {"cells", std::move(arr)}};
}

void write_projection_csv(std::ostream& out, std::span<const Pattern> patterns,
                          std::span<const std::array<double, 2>> coordinates) {
  if (patterns.size() != coordinates.size())
    throw Error(ErrorCode::DimensionMismatch, "projection rows do not align with patterns");
  out << "id,label,pc1,pc2\n";
  for (std::size_t i = 0; i < patterns.size(); ++i)
    out << patterns[i].id << ',' << to_string(patterns[i].label) << ',' << format_double(coordinates[i][0]) << ','
        << format_double(coordinates[i][1]) << '\n';
}

json balance_to_json(std::span<const BalanceRow> rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"method", r.method}, {"buy", r.buys}, {"sell", r.sells}, {"ratio", r.ratio}});
  return arr;
}

}  // namespace qpat::artifacts
