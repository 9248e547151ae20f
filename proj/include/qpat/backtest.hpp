#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpat/quality_filter.hpp"

namespace qpat {

enum class Outcome { Target, Stop, EndOfData };

std::string_view to_string(Outcome outcome);

struct TradeRecord {
  Timestamp entry_time{};
  Label direction = Label::Buy;
  double entry_price = 0.0;
  Timestamp exit_time{};  // close of the bar on which the exit happened
  double exit_price = 0.0;
  Outcome outcome = Outcome::EndOfData;
  double pnl = 0.0;  // points, net of cost_per_trade
  std::int64_t matched_id = -1;
};

struct BacktestConfig {
  double target = 10.0;
  double stop = 10.0;
  double match_theta = 0.0;
  bool one_open_trade = true;
  double initial_capital = 10000.0;
  double point_value = 1.0;
  double cost_per_trade = 0.0;    // points deducted from every closed trade
  bool optimistic_fills = false;  // target wins a both-breach bar
  bool allow_train_overlap = false;

  void validate() const;
};

struct EquityPoint {
  Timestamp time{};
  double capital = 0.0;
};

struct EquitySummary {
  double total_return = 0.0;  // fraction of initial capital
  std::size_t trade_count = 0;
  double hit_rate = 0.0;      // share of trades with positive pnl
  double max_drawdown = 0.0;  // largest peak-to-trough fraction
  double final_capital = 0.0;
};

struct EquityCurve {
  std::vector<EquityPoint> points;  // starts at initial capital
  EquitySummary summary;
};

struct BacktestResult {
  EquityCurve equity;
  std::vector<TradeRecord> trades;
  std::vector<std::string> warnings;
};

struct Signal {
  Label direction = Label::Buy;
  std::int64_t matched_id = -1;
  double distance = 0.0;
};

/// Nearest library pattern by L1; a signal only when strictly closer than
/// match_theta. Equal distances resolve to the lower id. Throws EmptyLibrary.
std::optional<Signal> match(const FeatureVector& window, const FilteredLibrary& library, double match_theta);

/// Origin range [first, last] of every pattern the library was built from.
std::optional<std::pair<Timestamp, Timestamp>> training_span(const FilteredLibrary& library);

/// Bar-by-bar replay. With no open trade (or always, when one_open_trade is
/// off) the 8 bars before bar i are matched against the library; a signal
/// enters at bar i's open. Exits are checked from the entry bar onward; when
/// one bar breaches both target and stop the stop is taken unless
/// optimistic_fills. Trades still open at the end close at the last close.
/// Throws LibraryTrainOverlap when the series overlaps the library's
/// training span, unless allow_train_overlap (then a warning is recorded).
BacktestResult run_backtest(const BarSeries& series, const FilteredLibrary& library, const BacktestConfig& cfg);

EquitySummary summarize(const std::vector<EquityPoint>& points, std::size_t trade_count, std::size_t winners);

struct SweepCell {
  double target = 0.0;
  double stop = 0.0;
  EquitySummary summary;
};

/// One backtest per (target, stop) pair, targets-major order.
std::vector<SweepCell> parameter_sweep(const BarSeries& series, const FilteredLibrary& library,
                                       const BacktestConfig& base, std::span<const double> targets,
                                       std::span<const double> stops, unsigned threads = 1);

}  // namespace qpat
