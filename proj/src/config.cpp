#include "qpat/config.hpp"

#include <fstream>
#include <sstream>

#include "qpat/error.hpp"
#include "qpat/text.hpp"

namespace qpat {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  throw Error(ErrorCode::InvalidConfig,
              "config key '" + std::string(key) + "' = '" + std::string(value) + "': " + std::string(why));
}

double as_double(std::string_view key, std::string_view value) {
  auto v = text::parse_double(value);
  if (!v) bad(key, value, "expected a number");
  return *v;
}

int as_int(std::string_view key, std::string_view value) {
  auto v = text::parse_int(value);
  if (!v) bad(key, value, "expected an integer");
  return static_cast<int>(*v);
}

bool as_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad(key, value, "expected true or false");
}

std::optional<double> as_auto_double(std::string_view key, std::string_view value) {
  if (value == "auto") return std::nullopt;
  return as_double(key, value);
}

std::vector<double> as_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  for (auto part : text::split(value, ',')) out.push_back(as_double(key, part));
  return out;
}

std::vector<fs::path> as_paths(std::string_view value, const fs::path& base) {
  std::vector<fs::path> out;
  if (text::trim(value).empty()) return out;
  for (auto part : text::split(value, ',')) {
    fs::path p{std::string(text::trim(part))};
    if (p.is_relative() && !base.empty()) p = base / p;
    out.push_back(p.lexically_normal());
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + text::format_double(v[i]);
  return s;
}

std::string join(const std::vector<fs::path>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i].string();
  return s;
}

std::string b(bool v) { return v ? "true" : "false"; }

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "symbol", "train", "test", "interval", "drop-partial",
      "window-bars", "horizon-bars", "swing-points", "pnl-mode",
      "k", "alpha", "normalize-ig", "standardize", "theta",
      "match-theta", "target", "stop", "one-open-trade", "initial-capital", "point-value",
      "cost-per-trade", "optimistic-fills", "allow-overlap", "sweep-targets", "sweep-stops",
      "bins", "all-pairs-histogram", "sample-std", "seed", "out", "threads"};
  return keys;
}

bool is_switch_key(std::string_view key) {
  return key == "drop-partial" || key == "normalize-ig" || key == "standardize" || key == "one-open-trade" ||
         key == "optimistic-fills" || key == "allow-overlap" || key == "all-pairs-histogram" ||
         key == "sample-std";
}

void RunConfig::set(std::string_view key, std::string_view raw, const fs::path& base_dir) {
  const auto value = text::trim(raw);
  if (key == "symbol") symbol = std::string(value);
  else if (key == "train") train = as_paths(value, base_dir);
  else if (key == "test") test = as_paths(value, base_dir);
  else if (key == "interval") interval = as_int(key, value);
  else if (key == "drop-partial") drop_partial = as_bool(key, value);
  else if (key == "window-bars") labeling.window_bars = as_int(key, value);
  else if (key == "horizon-bars") labeling.horizon_bars = as_int(key, value);
  else if (key == "swing-points") labeling.swing_points = as_double(key, value);
  else if (key == "pnl-mode") {
    auto m = parse_pnl_mode(value);
    if (!m) bad(key, value, "expected max or mean");
    labeling.pnl_mode = *m;
  } else if (key == "k") scoring.k = as_int(key, value);
  else if (key == "alpha") scoring.alpha = as_double(key, value);
  else if (key == "normalize-ig") scoring.normalize_ig = as_bool(key, value);
  else if (key == "standardize") scoring.standardize = as_bool(key, value);
  else if (key == "theta") theta = as_auto_double(key, value);
  else if (key == "match-theta") match_theta = as_auto_double(key, value);
  else if (key == "target") backtest.target = as_double(key, value);
  else if (key == "stop") backtest.stop = as_double(key, value);
  else if (key == "one-open-trade") backtest.one_open_trade = as_bool(key, value);
  else if (key == "initial-capital") backtest.initial_capital = as_double(key, value);
  else if (key == "point-value") backtest.point_value = as_double(key, value);
  else if (key == "cost-per-trade") backtest.cost_per_trade = as_double(key, value);
  else if (key == "optimistic-fills") backtest.optimistic_fills = as_bool(key, value);
  else if (key == "allow-overlap") backtest.allow_train_overlap = as_bool(key, value);
  else if (key == "sweep-targets") sweep_targets = as_list(key, value);
  else if (key == "sweep-stops") sweep_stops = as_list(key, value);
  else if (key == "bins") bins = as_int(key, value);
  else if (key == "all-pairs-histogram") all_pairs_histogram = as_bool(key, value);
  else if (key == "sample-std") sample_std = as_bool(key, value);
  else if (key == "seed") {
    auto v = text::parse_int(value);
    if (!v || *v < 0) bad(key, value, "expected a non-negative integer");
    seed = static_cast<std::uint64_t>(*v);
  } else if (key == "out") {
    fs::path p{std::string(value)};
    out = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).lexically_normal();
  } else if (key == "threads") {
    auto v = text::parse_int(value);
    if (!v || *v < 0) bad(key, value, "expected a non-negative integer");
    threads = static_cast<unsigned>(*v);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown config key '" + std::string(key) + "'");
  }
}

void RunConfig::validate() const {
  if (interval <= 0) throw Error(ErrorCode::InvalidConfig, "interval must be positive");
  labeling.validate();
  if (!(scoring.alpha >= 0.0 && scoring.alpha <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "alpha must lie in [0, 1]");
  if (scoring.k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  if (theta && !(*theta > 0.0)) throw Error(ErrorCode::InvalidConfig, "theta must be positive");
  if (match_theta && !(*match_theta > 0.0)) throw Error(ErrorCode::InvalidConfig, "match-theta must be positive");
  BacktestConfig probe = backtest;
  probe.match_theta = 1.0;
  probe.validate();
  if (sweep_targets.empty() || sweep_stops.empty())
    throw Error(ErrorCode::InvalidConfig, "sweep grids must be nonempty");
  for (double v : sweep_targets)
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidConfig, "sweep targets must be positive");
  for (double v : sweep_stops)
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidConfig, "sweep stops must be positive");
  if (bins < 1) throw Error(ErrorCode::InvalidConfig, "bins must be >= 1");
}

std::map<std::string, std::string> RunConfig::to_map(bool include_runtime) const {
  std::map<std::string, std::string> m;
  m["symbol"] = symbol;
  m["train"] = join(train);
  m["test"] = join(test);
  m["interval"] = std::to_string(interval);
  m["drop-partial"] = b(drop_partial);
  m["window-bars"] = std::to_string(labeling.window_bars);
  m["horizon-bars"] = std::to_string(labeling.horizon_bars);
  m["swing-points"] = text::format_double(labeling.swing_points);
  m["pnl-mode"] = std::string(to_string(labeling.pnl_mode));
  m["k"] = std::to_string(scoring.k);
  m["alpha"] = text::format_double(scoring.alpha);
  m["normalize-ig"] = b(scoring.normalize_ig);
  m["standardize"] = b(scoring.standardize);
  m["theta"] = theta ? text::format_double(*theta) : "auto";
  m["match-theta"] = match_theta ? text::format_double(*match_theta) : "auto";
  m["target"] = text::format_double(backtest.target);
  m["stop"] = text::format_double(backtest.stop);
  m["one-open-trade"] = b(backtest.one_open_trade);
  m["initial-capital"] = text::format_double(backtest.initial_capital);
  m["point-value"] = text::format_double(backtest.point_value);
  m["cost-per-trade"] = text::format_double(backtest.cost_per_trade);
  m["optimistic-fills"] = b(backtest.optimistic_fills);
  m["allow-overlap"] = b(backtest.allow_train_overlap);
  m["sweep-targets"] = join(sweep_targets);
  m["sweep-stops"] = join(sweep_stops);
  m["bins"] = std::to_string(bins);
  m["all-pairs-histogram"] = b(all_pairs_histogram);
  m["sample-std"] = b(sample_std);
  m["seed"] = std::to_string(seed);
  if (include_runtime) {
    m["out"] = out.string();
    m["threads"] = std::to_string(threads);
  }
  return m;
}

std::string RunConfig::to_text() const {
  std::ostringstream s;
  const auto m = to_map(true);
  for (const auto& key : config_keys()) {
    auto it = m.find(key);
    if (it != m.end()) s << key << " = " << it->second << '\n';
  }
  return s.str();
}

RunConfig parse_config(std::string_view textv, const fs::path& base_dir) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= textv.size()) {
    auto eol = textv.find('\n', pos);
    if (eol == std::string_view::npos) eol = textv.size();
    auto line = textv.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(line_no) + ": expected key = value");
    cfg.set(text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)), base_dir);
  }
  return cfg;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto base = fs::absolute(file).parent_path();
  return parse_config(buf.str(), base);
}

}  // namespace qpat
