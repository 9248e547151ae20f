#pragma once

// Builders and independent reference implementations shared by the unit
// tests and the acceptance gate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "qpat/entropy.hpp"
#include "qpat/error.hpp"
#include "qpat/market_data.hpp"
#include "qpat/pattern.hpp"
#include "qpat/quality_filter.hpp"

namespace qpat::testing {

inline Timestamp at(int y, unsigned m, unsigned d, int hh = 0, int mm = 0) {
  using namespace std::chrono;
  return sys_days{year{y} / month{m} / day{d}} + hours{hh} + minutes{mm};
}

/// Code of the qpat::Error thrown by fn, or nullopt if it returns normally.
template <class Fn>
std::optional<ErrorCode> error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline OhlcBar bar(Timestamp t, double o, double h, double l, double c) { return OhlcBar{t, o, h, l, c}; }

/// Contiguous bars starting at `start`, each `interval` minutes apart.
inline BarSeries series_of(Timestamp start, int interval, const std::vector<std::array<double, 4>>& ohlc) {
  BarSeries s{"TEST", interval, {}};
  for (std::size_t i = 0; i < ohlc.size(); ++i) {
    const auto& b = ohlc[i];
    s.bars.push_back(bar(start + std::chrono::minutes(interval * static_cast<int>(i)), b[0], b[1], b[2], b[3]));
  }
  return s;
}

inline Pattern pattern(std::int64_t id, Label label, const FeatureVector& f, double pnl = 20.0) {
  Pattern p;
  p.id = id;
  p.origin = at(2017, 1, 2) + std::chrono::minutes(30 * id);
  p.features = f;
  p.label = label;
  p.pnl_raw = pnl;
  return p;
}

/// Feature vector whose first entry is x and the rest zero.
inline FeatureVector on_axis(double x) {
  FeatureVector f{};
  f[0] = x;
  return f;
}

inline ScoredPattern scored(std::int64_t id, Label label, const FeatureVector& f, double score, double h_local = 0.0) {
  ScoredPattern s;
  s.pattern = pattern(id, label, f);
  s.h_local = h_local;
  s.score = score;
  return s;
}

// Reference implementations. Deliberately naive; they share no code with the
// library beyond the data types.

inline double l1_reference(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(b[i] - a[i]);
  return s;
}

/// k nearest neighbors of patterns[index] by a full sort of every pair.
inline std::vector<std::size_t> knn_full_sort(const std::vector<Pattern>& patterns, std::size_t index, int k) {
  std::vector<std::pair<std::pair<double, std::int64_t>, std::size_t>> all;
  for (std::size_t j = 0; j < patterns.size(); ++j) {
    if (j == index) continue;
    all.push_back({{l1_reference(patterns[index].features, patterns[j].features), patterns[j].id}, j});
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> out;
  for (int i = 0; i < k; ++i) out.push_back(all[static_cast<std::size_t>(i)].second);
  return out;
}

struct GreedyOracle {
  std::vector<std::int64_t> buys;
  std::vector<std::int64_t> sells;
  std::vector<std::pair<std::int64_t, std::int64_t>> rejected;  // (id, first blocker)
};

/// Nested-loop walk of the ranked list against admitted opposite-label items.
inline GreedyOracle greedy_reference(const std::vector<ScoredPattern>& ranked, double theta) {
  GreedyOracle out;
  std::vector<const ScoredPattern*> admitted;
  for (const auto& x : ranked) {
    const ScoredPattern* blocker = nullptr;
    for (const auto* y : admitted) {
      if (y->pattern.label == x.pattern.label) continue;
      if (l1_reference(x.pattern.features, y->pattern.features) < theta) {
        blocker = y;
        break;
      }
    }
    if (blocker) {
      out.rejected.push_back({x.pattern.id, blocker->pattern.id});
      continue;
    }
    admitted.push_back(&x);
    (x.pattern.label == Label::Buy ? out.buys : out.sells).push_back(x.pattern.id);
  }
  return out;
}

/// Small random instance with heavy ties: integer features on a coarse grid,
/// scores drawn from a handful of values.
inline std::vector<ScoredPattern> random_ranked(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> coord(0, 3), score(0, 4), hl(0, 2), side(0, 1);
  std::vector<ScoredPattern> v;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector f{};
    for (std::size_t d = 0; d < 4; ++d) f[d] = coord(rng);
    v.push_back(scored(static_cast<std::int64_t>(i), side(rng) ? Label::Buy : Label::Sell, f, score(rng) * 0.25,
                       hl(rng) * 0.1));
  }
  std::sort(v.begin(), v.end(), ranks_before);
  return v;
}

inline std::vector<Pattern> random_patterns(std::mt19937_64& rng, std::size_t n, bool grid) {
  std::uniform_int_distribution<int> coord(0, 2), side(0, 1);
  std::normal_distribution<double> gauss(0.0, 3.0);
  std::vector<Pattern> v;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector f{};
    for (auto& x : f) x = grid ? coord(rng) : gauss(rng);
    v.push_back(pattern(static_cast<std::int64_t>(i), side(rng) ? Label::Buy : Label::Sell, f));
  }
  std::shuffle(v.begin(), v.end(), rng);  // ids no longer follow index order
  return v;
}

}  // namespace qpat::testing
