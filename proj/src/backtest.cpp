#include "qpat/backtest.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "qpat/error.hpp"
#include "qpat/parallel.hpp"

namespace qpat {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Target: return "Target";
    case Outcome::Stop: return "Stop";
    case Outcome::EndOfData: return "EndOfData";
  }
  return "?";
}

void BacktestConfig::validate() const {
  if (!(target > 0.0)) throw Error(ErrorCode::InvalidConfig, "target must be positive");
  if (!(stop > 0.0)) throw Error(ErrorCode::InvalidConfig, "stop must be positive");
  if (!(match_theta > 0.0)) throw Error(ErrorCode::InvalidConfig, "match-theta must be positive");
  if (!(point_value > 0.0)) throw Error(ErrorCode::InvalidConfig, "point-value must be positive");
  if (!(initial_capital > 0.0)) throw Error(ErrorCode::InvalidConfig, "initial-capital must be positive");
  if (cost_per_trade < 0.0) throw Error(ErrorCode::InvalidConfig, "cost-per-trade must be >= 0");
}

std::optional<Signal> match(const FeatureVector& window, const FilteredLibrary& library, double match_theta) {
  if (library.empty()) throw Error(ErrorCode::EmptyLibrary, "pattern library is empty");
  Signal best;
  best.distance = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<ScoredPattern>& side) {
    for (const auto& s : side) {
      const double d = l1_distance(window, s.pattern.features);
      if (d < best.distance || (d == best.distance && s.pattern.id < best.matched_id)) {
        best = Signal{s.pattern.label, s.pattern.id, d};
      }
    }
  };
  consider(library.buys);
  consider(library.sells);
  if (best.distance < match_theta) return best;
  return std::nullopt;
}

std::optional<std::pair<Timestamp, Timestamp>> training_span(const FilteredLibrary& library) {
  std::optional<std::pair<Timestamp, Timestamp>> span;
  auto widen = [&](const Pattern& p) {
    if (!span) span = std::make_pair(p.origin, p.origin);
    span->first = std::min(span->first, p.origin);
    span->second = std::max(span->second, p.origin);
  };
  for (const auto& d : library.decisions) widen(d.item.pattern);
  for (const auto& s : library.buys) widen(s.pattern);
  for (const auto& s : library.sells) widen(s.pattern);
  return span;
}

EquitySummary summarize(const std::vector<EquityPoint>& points, std::size_t trade_count, std::size_t winners) {
  EquitySummary s;
  if (points.empty()) return s;
  const double initial = points.front().capital;
  s.final_capital = points.back().capital;
  s.total_return = (s.final_capital - initial) / initial;
  s.trade_count = trade_count;
  s.hit_rate = trade_count ? static_cast<double>(winners) / static_cast<double>(trade_count) : 0.0;
  double peak = initial;
  for (const auto& p : points) {
    peak = std::max(peak, p.capital);
    if (peak > 0.0) s.max_drawdown = std::max(s.max_drawdown, (peak - p.capital) / peak);
  }
  return s;
}

BacktestResult run_backtest(const BarSeries& series, const FilteredLibrary& library, const BacktestConfig& cfg) {
  cfg.validate();
  BacktestResult result;
  const auto& bars = series.bars;

  if (auto span = training_span(library); span && !bars.empty()) {
    if (bars.front().timestamp <= span->second && bars.back().timestamp >= span->first) {
      std::ostringstream msg;
      msg << "test series " << format_iso8601(bars.front().timestamp) << " .. "
          << format_iso8601(bars.back().timestamp) << " overlaps library training span "
          << format_iso8601(span->first) << " .. " << format_iso8601(span->second);
      if (!cfg.allow_train_overlap) throw Error(ErrorCode::LibraryTrainOverlap, msg.str());
      result.warnings.push_back(msg.str());
    }
  }

  double capital = cfg.initial_capital;
  auto& points = result.equity.points;
  points.push_back({bars.empty() ? Timestamp{} : bars.front().timestamp, capital});

  const std::chrono::minutes interval{series.interval_minutes};
  std::vector<TradeRecord> open;
  std::size_t winners = 0;

  auto close_trade = [&](TradeRecord t) {
    capital += t.pnl * cfg.point_value;
    points.push_back({t.exit_time, capital});
    if (t.pnl > 0.0) ++winners;
    result.trades.push_back(t);
  };

  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& bar = bars[i];

    if (i >= kWindowBars && !library.empty() && (!cfg.one_open_trade || open.empty())) {
      bool gap = false;
      for (std::size_t j = i - kWindowBars + 1; j <= i; ++j)
        if (!contiguous(bars[j - 1], bars[j], series.interval_minutes)) gap = true;
      if (!gap) {
        const auto window = featurize(std::span(bars).subspan(i - kWindowBars, kWindowBars));
        if (auto sig = match(window, library, cfg.match_theta)) {
          TradeRecord t;
          t.entry_time = bar.timestamp;
          t.direction = sig->direction;
          t.entry_price = bar.open;
          t.matched_id = sig->matched_id;
          open.push_back(t);
        }
      }
    }

    std::vector<TradeRecord> still_open;
    for (auto& t : open) {
      const bool buy = t.direction == Label::Buy;
      const double target_px = buy ? t.entry_price + cfg.target : t.entry_price - cfg.target;
      const double stop_px = buy ? t.entry_price - cfg.stop : t.entry_price + cfg.stop;
      const bool hit_target = buy ? bar.high >= target_px : bar.low <= target_px;
      const bool hit_stop = buy ? bar.low <= stop_px : bar.high >= stop_px;
      if (!hit_target && !hit_stop) {
        still_open.push_back(t);
        continue;
      }
      const bool take_target = hit_target && (!hit_stop || cfg.optimistic_fills);
      t.exit_time = bar.timestamp + interval;
      t.outcome = take_target ? Outcome::Target : Outcome::Stop;
      t.exit_price = take_target ? target_px : stop_px;
      t.pnl = (take_target ? cfg.target : -cfg.stop) - cfg.cost_per_trade;
      close_trade(t);
    }
    open = std::move(still_open);
  }

  for (auto& t : open) {
    const auto& last = bars.back();
    t.exit_time = last.timestamp + interval;
    t.outcome = Outcome::EndOfData;
    t.exit_price = last.close;
    const double move = last.close - t.entry_price;
    t.pnl = (t.direction == Label::Buy ? move : -move) - cfg.cost_per_trade;
    close_trade(t);
  }

  result.equity.summary = summarize(points, result.trades.size(), winners);
  return result;
}

std::vector<SweepCell> parameter_sweep(const BarSeries& series, const FilteredLibrary& library,
                                       const BacktestConfig& base, std::span<const double> targets,
                                       std::span<const double> stops, unsigned threads) {
  if (targets.empty() || stops.empty())
    throw Error(ErrorCode::InvalidConfig, "sweep grids must be nonempty");
  std::vector<SweepCell> cells(targets.size() * stops.size());
  parallel_for(cells.size(), threads, [&](std::size_t c) {
    BacktestConfig cfg = base;
    cfg.target = targets[c / stops.size()];
    cfg.stop = stops[c % stops.size()];
    cells[c] = SweepCell{cfg.target, cfg.stop, run_backtest(series, library, cfg).equity.summary};
  });
  return cells;
}

}  // namespace qpat
