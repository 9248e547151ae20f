#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qpat/entropy.hpp"

namespace qpat {

struct FilterConfig {
  double theta = 0.0;  // L1 overlap threshold, points
  ScoringConfig scoring;
};

/// One input pattern and what the greedy pass decided about it.
struct FilterDecision {
  ScoredPattern item;
  bool admitted = false;
  std::optional<std::int64_t> blocked_by;  // first admitted opposite-label pattern within theta
};

struct LabelCounts {
  std::size_t buys_before = 0;
  std::size_t sells_before = 0;
  std::size_t buys_after = 0;
  std::size_t sells_after = 0;
};

struct FilteredLibrary {
  std::vector<ScoredPattern> buys;   // admission order
  std::vector<ScoredPattern> sells;  // admission order
  FilterConfig config;
  LabelCounts provenance;
  std::vector<FilterDecision> decisions;  // every input, in ranked order

  bool empty() const { return buys.empty() && sells.empty(); }
};

/// Greedy cross-class admission over a ranked pool.
///
/// Patterns are visited in rank order. A Buy is admitted when it lies at L1
/// distance >= theta from every Sell admitted so far, and a Sell likewise
/// against admitted Buys. Same-label proximity never blocks, and patterns
/// that were rejected impose no constraint on later ones.
///
/// Throws UnsortedInput when the input is not in ranks_before order and
/// InvalidConfig when theta <= 0.
FilteredLibrary filter(std::span<const ScoredPattern> ranked, const FilterConfig& cfg);

struct VerifyReport {
  bool passed = true;
  double min_cross_distance = 0.0;  // +inf when either side is empty
  /// Closest Buy/Sell ids; set whenever both sides are nonempty.
  std::optional<std::pair<std::int64_t, std::int64_t>> closest_pair;
};

/// Exhaustive check of cross-class separation over all buy x sell pairs.
VerifyReport verify(const FilteredLibrary& library);

/// Linearly interpolated percentile (0..100) of all Buy x Sell L1 distances
/// in the pool. Throws EmptySide when either label is absent.
double cross_distance_percentile(std::span<const Pattern> patterns, double percentile);

/// Data-driven theta: the 5th percentile of raw cross-class distances.
double default_theta(std::span<const Pattern> patterns);

}  // namespace qpat
