#include "qpat/quality_filter.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "qpat/error.hpp"
#include "qpat/stats.hpp"

namespace qpat {

FilteredLibrary filter(std::span<const ScoredPattern> ranked, const FilterConfig& cfg) {
  if (!(cfg.theta > 0.0)) throw Error(ErrorCode::InvalidConfig, "theta must be positive");
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    if (!ranks_before(ranked[i - 1], ranked[i])) {
      std::ostringstream msg;
      msg << "input not ranked at position " << i << " (id " << ranked[i].pattern.id << ")";
      throw Error(ErrorCode::UnsortedInput, msg.str());
    }
  }

  FilteredLibrary lib;
  lib.config = cfg;
  lib.decisions.reserve(ranked.size());

  for (const auto& x : ranked) {
    const bool is_buy = x.pattern.label == Label::Buy;
    if (is_buy) ++lib.provenance.buys_before;
    else ++lib.provenance.sells_before;

    const auto& opposing = is_buy ? lib.sells : lib.buys;
    FilterDecision decision{x, true, std::nullopt};
    for (const auto& y : opposing) {
      if (l1_distance(x.pattern.features, y.pattern.features) < cfg.theta) {
        decision.admitted = false;
        decision.blocked_by = y.pattern.id;
        break;
      }
    }
    if (decision.admitted) (is_buy ? lib.buys : lib.sells).push_back(x);
    lib.decisions.push_back(std::move(decision));
  }
  lib.provenance.buys_after = lib.buys.size();
  lib.provenance.sells_after = lib.sells.size();
  return lib;
}

VerifyReport verify(const FilteredLibrary& library) {
  VerifyReport report;
  report.min_cross_distance = std::numeric_limits<double>::infinity();
  for (const auto& b : library.buys) {
    for (const auto& s : library.sells) {
      const double d = l1_distance(b.pattern.features, s.pattern.features);
      if (d < report.min_cross_distance) {
        report.min_cross_distance = d;
        report.closest_pair = std::make_pair(b.pattern.id, s.pattern.id);
      }
    }
  }
  report.passed = report.min_cross_distance >= library.config.theta;
  return report;
}

double cross_distance_percentile(std::span<const Pattern> patterns, double percentile) {
  std::vector<const Pattern*> buys, sells;
  for (const auto& p : patterns) (p.label == Label::Buy ? buys : sells).push_back(&p);
  if (buys.empty() || sells.empty())
    throw Error(ErrorCode::EmptySide, "cross-class distances need both Buy and Sell patterns");
  std::vector<double> d;
  d.reserve(buys.size() * sells.size());
  for (const auto* b : buys)
    for (const auto* s : sells) d.push_back(l1_distance(b->features, s->features));
  std::sort(d.begin(), d.end());
  return stats::quantile_sorted(d, percentile / 100.0);
}

double default_theta(std::span<const Pattern> patterns) {
  return cross_distance_percentile(patterns, 5.0);
}

}  // namespace qpat
