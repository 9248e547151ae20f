#include "qpat/pattern.hpp"

#include <algorithm>
#include <sstream>

#include "qpat/error.hpp"

namespace qpat {

std::string_view to_string(Label label) { return label == Label::Buy ? "Buy" : "Sell"; }

std::optional<Label> parse_label(std::string_view s) {
  if (s == "Buy") return Label::Buy;
  if (s == "Sell") return Label::Sell;
  return std::nullopt;
}

std::string_view to_string(PnlMode mode) { return mode == PnlMode::Max ? "max" : "mean"; }

std::optional<PnlMode> parse_pnl_mode(std::string_view s) {
  if (s == "max") return PnlMode::Max;
  if (s == "mean") return PnlMode::Mean;
  return std::nullopt;
}

void LabelingConfig::validate() const {
  if (window_bars != static_cast<int>(kWindowBars))
    throw Error(ErrorCode::InvalidConfig, "window-bars must be 8 (32 features)");
  if (horizon_bars <= 0) throw Error(ErrorCode::InvalidConfig, "horizon-bars must be positive");
  if (!(swing_points > 0.0)) throw Error(ErrorCode::InvalidConfig, "swing-points must be positive");
}

FeatureVector featurize(std::span<const OhlcBar> window) {
  if (window.size() != kWindowBars) {
    std::ostringstream msg;
    msg << "featurize needs " << kWindowBars << " bars, got " << window.size();
    throw Error(ErrorCode::WrongWindowLength, msg.str());
  }
  FeatureVector f{};
  for (std::size_t j = 0; j < kWindowBars; ++j) {
    const auto& b = window[j];
    f[4 * j + 0] = b.high - b.low;
    f[4 * j + 1] = b.close - b.open;
    f[4 * j + 2] = b.high - b.open;
    f[4 * j + 3] = b.open - b.low;
  }
  return f;
}

namespace {

struct Outcome {
  Label label;
  double pnl;
};

std::optional<Outcome> label_horizon(std::span<const OhlcBar> horizon, double entry,
                                     const LabelingConfig& cfg) {
  const double up = entry + cfg.swing_points;
  const double down = entry - cfg.swing_points;
  std::optional<Label> first;
  for (const auto& bar : horizon) {
    const bool hit_up = bar.high >= up;
    const bool hit_down = bar.low <= down;
    // no intra-bar ordering at this resolution
    if (hit_up && hit_down) return std::nullopt;
    if (!first) {
      if (hit_up) first = Label::Buy;
      else if (hit_down) first = Label::Sell;
    }
  }
  if (!first) return std::nullopt;

  double best = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < horizon.size(); ++j) {
    const double excursion = *first == Label::Buy ? horizon[j].high - entry : entry - horizon[j].low;
    best = j == 0 ? excursion : std::max(best, excursion);
    total += excursion;
  }
  const double pnl = cfg.pnl_mode == PnlMode::Max ? best : total / static_cast<double>(horizon.size());
  return Outcome{*first, pnl};
}

}  // namespace

std::vector<Pattern> extract_patterns(const BarSeries& series, const LabelingConfig& cfg) {
  cfg.validate();
  const auto window = static_cast<std::size_t>(cfg.window_bars);
  const auto horizon = static_cast<std::size_t>(cfg.horizon_bars);
  const std::size_t span = window + horizon;
  const auto& bars = series.bars;
  if (bars.size() < span) {
    std::ostringstream msg;
    msg << "series has " << bars.size() << " bars, need at least " << span;
    throw Error(ErrorCode::SeriesTooShort, msg.str());
  }

  // gap_before[i]: bars i-1 and i are not adjacent buckets
  std::vector<std::size_t> gaps_prefix(bars.size() + 1, 0);
  for (std::size_t i = 1; i < bars.size(); ++i) {
    const bool gap = !contiguous(bars[i - 1], bars[i], series.interval_minutes);
    gaps_prefix[i + 1] = gaps_prefix[i] + (gap ? 1 : 0);
  }
  auto has_gap = [&](std::size_t first, std::size_t last) {  // between bars first..last
    return gaps_prefix[last + 1] - gaps_prefix[first + 1] != 0;
  };

  std::vector<Pattern> out;
  for (std::size_t i = 0; i + span <= bars.size(); ++i) {
    if (has_gap(i, i + span - 1)) continue;
    const double entry = bars[i + window - 1].close;
    auto outcome = label_horizon(std::span(bars).subspan(i + window, horizon), entry, cfg);
    if (!outcome) continue;
    Pattern p;
    p.id = static_cast<std::int64_t>(out.size());
    p.origin = bars[i].timestamp;
    p.features = featurize(std::span(bars).subspan(i, window));
    p.label = outcome->label;
    p.pnl_raw = outcome->pnl;
    out.push_back(p);
  }
  return out;
}

}  // namespace qpat
