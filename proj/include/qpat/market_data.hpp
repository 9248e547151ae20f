#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qpat {

/// Naive exchange-local time at minute resolution. No timezone conversion is
/// ever applied; the feed's convention passes through untouched.
using Timestamp = std::chrono::sys_time<std::chrono::minutes>;

struct OhlcBar {
  Timestamp timestamp{};
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
};

/// low <= open, close <= high.
bool is_valid(const OhlcBar& bar);

struct BarSeries {
  std::string symbol;
  int interval_minutes = 1;
  std::vector<OhlcBar> bars;

  bool empty() const { return bars.empty(); }
  std::size_t size() const { return bars.size(); }
};

/// Parses histdata "Generic ASCII M1" text: `YYYYMMDD HHMMSS;o;h;l;c;volume`.
/// Blank lines are skipped; volume is validated then dropped.
BarSeries parse_histdata_csv(std::string_view text, std::string symbol = {});
BarSeries parse_histdata_csv(std::istream& in, std::string symbol = {});

struct AggregateOptions {
  bool drop_partial = false;  // drop the final bucket when it is not full
};

struct AggregatedSeries {
  BarSeries series;
  std::vector<std::size_t> source_counts;  // source bars merged into each output bar
};

/// Merges bars into clock-aligned buckets of target_minutes. Empty buckets are
/// omitted rather than filled.
AggregatedSeries aggregate_counted(const BarSeries& series, int target_minutes,
                                   const AggregateOptions& options = {});

BarSeries aggregate(const BarSeries& series, int target_minutes,
                    const AggregateOptions& options = {});

/// Concatenates series of equal interval and symbol, checking ordering.
BarSeries concat(std::vector<BarSeries> parts);

/// True when b follows a with no missing bucket in between.
bool contiguous(const OhlcBar& a, const OhlcBar& b, int interval_minutes);

std::string format_iso8601(Timestamp ts);
Timestamp parse_iso8601(std::string_view text);

/// Aggregated bar CSV: header `timestamp_iso8601,open,high,low,close`.
void write_bars_csv(std::ostream& out, const BarSeries& series);
BarSeries read_bars_csv(std::istream& in, int interval_minutes, std::string symbol = {});

}  // namespace qpat
