#include "qpat/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qpat/error.hpp"
#include "qpat/parallel.hpp"

namespace qpat {

double shannon_entropy(std::span<const double> probabilities) {
  double sum = 0.0;
  bool negative = false;
  for (double p : probabilities) {
    if (!(p >= 0.0)) negative = true;
    sum += p;
  }
  if (negative || !(std::abs(sum - 1.0) <= 1e-9)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "not a probability distribution (sum = " << sum
        << (negative ? ", negative entry" : "") << ")";
    throw Error(ErrorCode::NotADistribution, msg.str());
  }
  double h = 0.0;
  for (double p : probabilities)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

double label_entropy(std::size_t buys, std::size_t sells) {
  const std::size_t n = buys + sells;
  if (n == 0) return 0.0;
  const double p[2] = {static_cast<double>(buys) / static_cast<double>(n),
                       static_cast<double>(sells) / static_cast<double>(n)};
  return shannon_entropy(p);
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    std::ostringstream msg;
    msg << "l1_distance on vectors of length " << a.size() << " and " << b.size();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

namespace {

void check_k(int k, std::size_t n) {
  if (k < 1 || static_cast<std::size_t>(k) >= n) {
    std::ostringstream msg;
    msg << "k = " << k << " must satisfy 1 <= k < " << n;
    throw Error(ErrorCode::KTooLarge, msg.str());
  }
}

struct Candidate {
  double distance;
  std::int64_t id;
  std::size_t index;
};

bool closer(const Candidate& a, const Candidate& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.id < b.id;
}

}  // namespace

std::vector<std::size_t> nearest_neighbors(std::span<const FeatureVector> points,
                                           std::span<const std::int64_t> ids, std::size_t index,
                                           int k) {
  const std::size_t n = points.size();
  if (ids.size() != n) throw Error(ErrorCode::DimensionMismatch, "ids and points differ in length");
  if (index >= n) throw Error(ErrorCode::EmptyInput, "neighbor query index out of range");
  check_k(k, n);

  std::vector<Candidate> cand;
  cand.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == index) continue;
    cand.push_back({l1_distance(points[index], points[j]), ids[j], j});
  }
  const auto kk = static_cast<std::size_t>(k);
  std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(kk - 1), cand.end(), closer);
  std::sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(kk), closer);

  std::vector<std::size_t> out(kk);
  for (std::size_t i = 0; i < kk; ++i) out[i] = cand[i].index;
  return out;
}

namespace {

std::vector<FeatureVector> features_of(std::span<const Pattern> all) {
  std::vector<FeatureVector> f(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) f[i] = all[i].features;
  return f;
}

std::vector<std::int64_t> ids_of(std::span<const Pattern> all) {
  std::vector<std::int64_t> ids(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) ids[i] = all[i].id;
  return ids;
}

double neighborhood_entropy(std::span<const Pattern> all, const std::vector<std::size_t>& nbrs) {
  std::size_t buys = 0;
  for (auto j : nbrs)
    if (all[j].label == Label::Buy) ++buys;
  return label_entropy(buys, nbrs.size() - buys);
}

// Per-dimension z-score; constant dimensions are only centered.
std::vector<FeatureVector> standardized(std::span<const Pattern> all) {
  auto f = features_of(all);
  const double n = static_cast<double>(all.size());
  for (std::size_t d = 0; d < kFeatureCount; ++d) {
    double mean = 0.0;
    for (const auto& v : f) mean += v[d];
    mean /= n;
    double ss = 0.0;
    for (const auto& v : f) ss += (v[d] - mean) * (v[d] - mean);
    const double sd = std::sqrt(ss / n);
    for (auto& v : f) v[d] = sd > 0.0 ? (v[d] - mean) / sd : 0.0;
  }
  return f;
}

}  // namespace

std::vector<std::size_t> nearest_neighbors(std::span<const Pattern> all, std::size_t index, int k) {
  auto f = features_of(all);
  auto ids = ids_of(all);
  return nearest_neighbors(f, ids, index, k);
}

double local_entropy(std::span<const Pattern> all, std::size_t index, int k) {
  return neighborhood_entropy(all, nearest_neighbors(all, index, k));
}

void ScoringConfig::validate(std::size_t n) const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "alpha must lie in [0, 1]");
  check_k(k, n);
}

bool ranks_before(const ScoredPattern& a, const ScoredPattern& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.h_local != b.h_local) return a.h_local < b.h_local;
  return a.pattern.id < b.pattern.id;
}

double global_entropy(std::span<const Pattern> patterns) {
  std::size_t buys = 0;
  for (const auto& p : patterns)
    if (p.label == Label::Buy) ++buys;
  return label_entropy(buys, patterns.size() - buys);
}

std::vector<double> normalize_pnl(std::span<const Pattern> patterns) {
  std::vector<double> out(patterns.size(), 1.0);
  if (patterns.empty()) return out;
  auto [lo, hi] = std::minmax_element(patterns.begin(), patterns.end(),
                                      [](const Pattern& a, const Pattern& b) { return a.pnl_raw < b.pnl_raw; });
  const double min = lo->pnl_raw;
  const double range = hi->pnl_raw - min;
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < patterns.size(); ++i) out[i] = (patterns[i].pnl_raw - min) / range;
  return out;
}

std::vector<ScoredPattern> score_all(std::span<const Pattern> patterns, const ScoringConfig& cfg) {
  if (patterns.empty()) throw Error(ErrorCode::EmptyInput, "no patterns to score");
  cfg.validate(patterns.size());

  const auto space = cfg.standardize ? standardized(patterns) : features_of(patterns);
  const auto ids = ids_of(patterns);
  const double h_global = global_entropy(patterns);
  const auto pnl_norm = normalize_pnl(patterns);

  std::vector<ScoredPattern> out(patterns.size());
  parallel_for(patterns.size(), cfg.threads, [&](std::size_t i) {
    auto& s = out[i];
    s.pattern = patterns[i];
    s.h_local = neighborhood_entropy(patterns, nearest_neighbors(space, ids, i, cfg.k));
    s.info_gain = h_global - s.h_local;
    if (cfg.normalize_ig) s.info_gain = h_global > 0.0 ? s.info_gain / h_global : 0.0;
    s.pnl_norm = pnl_norm[i];
    s.score = cfg.alpha * s.info_gain + (1.0 - cfg.alpha) * s.pnl_norm;
  });
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

}  // namespace qpat
