#include "qpat/stats.hpp"

#include <algorithm>
#include <cmath>

#include "qpat/error.hpp"

namespace qpat::stats {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "mean of empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double median(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "median of empty sample");
  std::vector<double> work(values.begin(), values.end());
  std::sort(work.begin(), work.end());
  const std::size_t n = work.size();
  if (n % 2 == 1) return work[n / 2];
  return 0.5 * (work[n / 2 - 1] + work[n / 2]);
}

double stddev(std::span<const double> values, bool sample) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "stddev of empty sample");
  if (sample && values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  const double denom = static_cast<double>(values.size()) - (sample ? 1.0 : 0.0);
  return std::sqrt(ss / denom);
}

}  // namespace qpat::stats
