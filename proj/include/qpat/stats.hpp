#pragma once

#include <span>
#include <vector>

namespace qpat::stats {

/// Quantile of already sorted data with linear interpolation between order
/// statistics (h = (n-1)p). Requires a nonempty input and p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

double mean(std::span<const double> values);

/// Median by full sort of a copy.
double median(std::span<const double> values);

/// Standard deviation; population (divide by n) unless sample is set.
double stddev(std::span<const double> values, bool sample = false);

}  // namespace qpat::stats
