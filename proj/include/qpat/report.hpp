#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qpat/market_data.hpp"
#include "qpat/pattern.hpp"

namespace qpat {

enum class Population { Raw, Filtered };

std::string_view to_string(Population population);

struct DistanceHistogram {
  std::vector<double> edges;         // bins + 1 edges over [min, max]
  std::vector<std::size_t> counts;   // one per bin; the last bin is closed
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t samples = 0;
  Population population = Population::Raw;
};

/// Histogram of every Buy x Sell L1 distance with exact mean and median.
/// Throws EmptySide when either side is empty.
DistanceHistogram cross_distance_histogram(std::span<const FeatureVector> buys,
                                           std::span<const FeatureVector> sells, int bins,
                                           Population population);

/// Same over all unordered pairs of one pool, regardless of label.
DistanceHistogram all_pairs_distance_histogram(std::span<const FeatureVector> points, int bins,
                                               Population population);

/// Builds a histogram from an explicit distance sample.
DistanceHistogram histogram_of(std::vector<double> distances, int bins, Population population);

struct HistogramShift {
  double mean_delta = 0.0;    // filtered - raw
  double median_delta = 0.0;  // filtered - raw
};

HistogramShift compare(const DistanceHistogram& raw, const DistanceHistogram& filtered);

void write_histogram_csv(std::ostream& out, const DistanceHistogram& h);

struct BoxStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;   // smallest value >= q1 - 1.5 IQR
  double whisker_high = 0.0;  // largest value <= q3 + 1.5 IQR
  double mean = 0.0;
  std::vector<double> outliers;
};

BoxStats box_stats(std::span<const double> values);

struct MonthlyStd {
  unsigned month = 1;
  double stddev = 0.0;
  std::size_t bars = 0;
};

struct YearVolatility {
  int year = 0;
  std::vector<MonthlyStd> months;  // calendar months present in the data
  BoxStats box;
};

struct VolatilityStats {
  std::vector<YearVolatility> years;
};

/// Standard deviation of open prices per calendar month, summarized per year.
/// Population std unless sample_std. Throws EmptySeries.
VolatilityStats monthly_volatility(const BarSeries& series, bool sample_std = false);

void write_volatility_csv(std::ostream& out, const VolatilityStats& stats);

/// Minimal SVG writers for the histogram and the yearly box plots.
std::string histogram_svg(const DistanceHistogram& h, std::string_view title);
std::string volatility_svg(const VolatilityStats& stats, std::string_view title);

}  // namespace qpat
