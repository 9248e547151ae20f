#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qpat/pattern.hpp"

namespace qpat {

/// -sum p ln p in nats, with 0 ln 0 = 0. Throws NotADistribution when any
/// p < 0 or the sum is off 1 by more than 1e-9.
double shannon_entropy(std::span<const double> probabilities);

/// Entropy of a two-label count distribution. Zero for an empty input.
double label_entropy(std::size_t buys, std::size_t sells);

/// Sum of |a_i - b_i|, accumulated in index order. Throws DimensionMismatch.
double l1_distance(std::span<const double> a, std::span<const double> b);

inline double l1_distance(const FeatureVector& a, const FeatureVector& b) {
  return l1_distance(std::span<const double>(a), std::span<const double>(b));
}

/// Indices of the k nearest points to points[index] by L1, excluding index
/// itself, ordered by (distance, id). Throws KTooLarge unless 1 <= k < n.
std::vector<std::size_t> nearest_neighbors(std::span<const FeatureVector> points,
                                           std::span<const std::int64_t> ids, std::size_t index,
                                           int k);

std::vector<std::size_t> nearest_neighbors(std::span<const Pattern> all, std::size_t index, int k);

/// Label entropy over the k nearest neighbors of all[index].
double local_entropy(std::span<const Pattern> all, std::size_t index, int k);

struct ScoringConfig {
  int k = 25;
  double alpha = 0.8;
  bool normalize_ig = false;  // divide info gain by the global entropy
  bool standardize = false;   // z-score each feature before the neighbor search
  unsigned threads = 1;       // 0 = hardware concurrency

  /// Throws InvalidConfig / KTooLarge for a pattern pool of size n.
  void validate(std::size_t n) const;
};

struct ScoredPattern {
  Pattern pattern;
  double h_local = 0.0;
  double info_gain = 0.0;
  double pnl_norm = 0.0;
  double score = 0.0;
};

/// Total order used for ranking: score descending, then h_local ascending,
/// then id ascending.
bool ranks_before(const ScoredPattern& a, const ScoredPattern& b);

/// Label entropy of the whole pool.
double global_entropy(std::span<const Pattern> patterns);

/// Min-max PnL normalization over the pool; every pattern maps to 1 when all
/// PnL values are equal.
std::vector<double> normalize_pnl(std::span<const Pattern> patterns);

/// Scores every pattern (local entropy, information gain against the pool's
/// label entropy, normalized PnL, weighted score) and returns them ranked.
/// Throws EmptyInput for an empty pool.
std::vector<ScoredPattern> score_all(std::span<const Pattern> patterns, const ScoringConfig& cfg);

}  // namespace qpat
