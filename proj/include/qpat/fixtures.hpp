#pragma once

// Synthetic data with known ground truth, used by the `fixture` subcommand
// and by the test suites.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "qpat/market_data.hpp"
#include "qpat/pattern.hpp"

namespace qpat::fixtures {

struct PlantedSeries {
  BarSeries series;
  std::vector<Timestamp> planted_origins;  // windows that must be labeled Buy
};

/// Slow sine-plus-trend drift on 30-minute bars with +20-point ramps planted
/// after selected windows. Only the planted windows see a 15-point swing.
PlantedSeries planted_ramps(std::uint64_t seed, std::size_t bars = 600, std::size_t ramps = 10);

struct MarketFixtureOptions {
  std::chrono::sys_days start = std::chrono::sys_days{std::chrono::year{2017} / 1 / 2};
  int trading_days = 120;       // weekdays only; weekends are gaps
  int motif_spacing_min = 24;   // bars between motif starts
  int motif_spacing_max = 40;
};

/// Quiet random walk on weekday 30-minute bars with three planted motifs:
/// one always followed by a rally, one always by a selloff, and one followed
/// by either with equal odds. Prices sit on a 0.01 grid.
BarSeries market_fixture(std::uint64_t seed, const MarketFixtureOptions& options = {});

/// Writes 30-minute bars as histdata M1 text, 30 minute bars each, such that
/// aggregating back to 30 minutes reproduces the input exactly.
void write_histdata_minutes(std::ostream& out, const BarSeries& bars30);

struct BlobSpec {
  std::size_t buys = 0;
  std::size_t sells = 0;
  double center_offset = 0.0;  // center = offset * direction vector
  std::uint64_t direction_seed = 0;
  double spread = 1.0;         // per-feature standard deviation
};

struct DatasetInfo {
  std::size_t train_bars = 0;
  std::size_t test_bars = 0;
};

/// Writes fixture_train.csv, fixture_test.csv (a later date range from a
/// different seed) and fixture.conf into dir.
DatasetInfo write_market_dataset(const std::filesystem::path& dir, std::uint64_t seed);

/// Gaussian pattern clouds in feature space; ids are assigned sequentially.
std::vector<Pattern> blob_patterns(std::uint64_t seed, const std::vector<BlobSpec>& blobs);

/// Two pure regions (one Buy, one Sell) on opposite sides of a mixed region
/// holding both.
std::vector<Pattern> mixed_region_patterns(std::uint64_t seed);

/// One dense mixed region and one sparse, far, pure Buy region.
std::vector<Pattern> skew_patterns(std::uint64_t seed);

}  // namespace qpat::fixtures
