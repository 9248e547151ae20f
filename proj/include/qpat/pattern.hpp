#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qpat/market_data.hpp"

namespace qpat {

inline constexpr std::size_t kWindowBars = 8;
inline constexpr std::size_t kFeaturesPerBar = 4;
inline constexpr std::size_t kFeatureCount = kWindowBars * kFeaturesPerBar;

/// Bar-major: entries 4j..4j+3 are (H-L, C-O, H-O, O-L) of bar j, in price points.
using FeatureVector = std::array<double, kFeatureCount>;

enum class Label : std::uint8_t { Buy, Sell };

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view s);

inline Label opposite(Label label) { return label == Label::Buy ? Label::Sell : Label::Buy; }

struct Pattern {
  std::int64_t id = 0;
  Timestamp origin{};  // first bar of the window
  FeatureVector features{};
  Label label = Label::Buy;
  double pnl_raw = 0.0;  // favorable excursion over the horizon, points
};

enum class PnlMode { Max, Mean };

std::string_view to_string(PnlMode mode);
std::optional<PnlMode> parse_pnl_mode(std::string_view s);

struct LabelingConfig {
  int window_bars = static_cast<int>(kWindowBars);
  int horizon_bars = 4;       // two hours of 30-minute bars
  double swing_points = 15.0;
  PnlMode pnl_mode = PnlMode::Max;

  /// Throws InvalidConfig. The feature layout fixes window_bars at 8.
  void validate() const;
};

/// Throws WrongWindowLength unless given exactly 8 bars.
FeatureVector featurize(std::span<const OhlcBar> window);

/// Slides a stride-1 window over the series and emits one labeled pattern for
/// every window followed by a one-sided swing of at least swing_points from
/// the window's last close. Windows whose window+horizon span crosses a gap,
/// or whose horizon holds a bar breaching both thresholds, are skipped.
/// Output is ordered by origin; ids are 0..n-1 in that order.
std::vector<Pattern> extract_patterns(const BarSeries& series, const LabelingConfig& cfg);

}  // namespace qpat
