#include <limits>

#include "doctest.h"
#include "qpat/quality_filter.hpp"
#include "support.hpp"

using namespace qpat;
using namespace qpat::testing;

namespace {

FilterConfig theta(double t) {
  FilterConfig c;
  c.theta = t;
  return c;
}

std::vector<std::int64_t> ids(const std::vector<ScoredPattern>& v) {
  std::vector<std::int64_t> out;
  for (const auto& s : v) out.push_back(s.pattern.id);
  return out;
}

}  // namespace

TEST_CASE("separated opposite labels are both admitted") {
  std::vector<ScoredPattern> v{scored(0, Label::Buy, on_axis(0), 0.9), scored(1, Label::Sell, on_axis(10), 0.8)};
  auto lib = filter(v, theta(5));
  CHECK(ids(lib.buys) == std::vector<std::int64_t>{0});
  CHECK(ids(lib.sells) == std::vector<std::int64_t>{1});
}

TEST_CASE("higher score wins a conflict") {
  std::vector<ScoredPattern> v{scored(0, Label::Buy, on_axis(0), 0.9), scored(1, Label::Sell, on_axis(2.5), 0.8)};
  auto lib = filter(v, theta(5));
  CHECK(ids(lib.buys) == std::vector<std::int64_t>{0});
  CHECK(lib.sells.empty());
  REQUIRE(lib.decisions.size() == 2);
  CHECK_FALSE(lib.decisions[1].admitted);
  CHECK(lib.decisions[1].blocked_by == 0);
}

TEST_CASE("chain of three") {
  // s1 at 0, b1 at 10 (d = 10 >= 5), s2 at 12 (d(s2,b1) = 2 < 5, d(s2,s1) irrelevant)
  std::vector<ScoredPattern> v{scored(1, Label::Sell, on_axis(0), 0.9), scored(2, Label::Buy, on_axis(10), 0.8),
                               scored(3, Label::Sell, on_axis(12), 0.7)};
  auto lib = filter(v, theta(5));
  CHECK(ids(lib.buys) == std::vector<std::int64_t>{2});
  CHECK(ids(lib.sells) == std::vector<std::int64_t>{1});
  CHECK(lib.decisions[2].blocked_by == 2);
}

TEST_CASE("single label admits everything") {
  std::vector<ScoredPattern> v;
  for (int i = 0; i < 10; ++i) v.push_back(scored(i, Label::Buy, on_axis(0), 1.0 - 0.01 * i));
  auto lib = filter(v, theta(1e9));
  CHECK(lib.buys.size() == 10);
  CHECK(lib.provenance.buys_before == 10);
  CHECK(lib.provenance.buys_after == 10);
  CHECK(lib.provenance.sells_before == 0);
}

TEST_CASE("same-label proximity never blocks") {
  std::vector<ScoredPattern> v{scored(0, Label::Buy, on_axis(0), 0.9), scored(1, Label::Buy, on_axis(0), 0.8),
                               scored(2, Label::Sell, on_axis(100), 0.7)};
  auto lib = filter(v, theta(5));
  CHECK(lib.buys.size() == 2);
  CHECK(lib.sells.size() == 1);
}

TEST_CASE("a rejected pattern imposes no constraint") {
  // b blocks s1; s1 would have blocked b2, but s1 was never admitted
  std::vector<ScoredPattern> v{scored(0, Label::Buy, on_axis(0), 0.9), scored(1, Label::Sell, on_axis(3), 0.8),
                               scored(2, Label::Buy, on_axis(5), 0.7)};
  auto lib = filter(v, theta(4));
  CHECK(ids(lib.buys) == std::vector<std::int64_t>{0, 2});
  CHECK(lib.sells.empty());
}

TEST_CASE("input order is verified") {
  std::vector<ScoredPattern> v{scored(0, Label::Buy, on_axis(0), 0.1), scored(1, Label::Sell, on_axis(10), 0.8)};
  CHECK(error_of([&] { filter(v, theta(5)); }) == ErrorCode::UnsortedInput);
  CHECK(error_of([&] { filter(std::span<const ScoredPattern>{}, theta(0)); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("theta exactly at the distance admits") {
  std::vector<ScoredPattern> v{scored(0, Label::Buy, on_axis(0), 0.9), scored(1, Label::Sell, on_axis(5), 0.8)};
  CHECK(filter(v, theta(5)).sells.size() == 1);
}

TEST_CASE("verify") {
  FilteredLibrary lib;
  lib.config.theta = 5;
  lib.buys = {scored(0, Label::Buy, on_axis(0), 1)};
  auto r = verify(lib);
  CHECK(r.passed);
  CHECK(r.min_cross_distance == std::numeric_limits<double>::infinity());

  lib.sells = {scored(1, Label::Sell, on_axis(9), 1), scored(2, Label::Sell, on_axis(3), 1)};
  r = verify(lib);
  CHECK_FALSE(r.passed);
  CHECK(r.min_cross_distance == 3);
  REQUIRE(r.closest_pair);
  CHECK(*r.closest_pair == std::pair<std::int64_t, std::int64_t>{0, 2});
}

TEST_CASE("filter equals the nested-loop oracle") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(0, 20), th(1, 6);
  for (int t = 0; t < 300; ++t) {
    auto v = random_ranked(rng, static_cast<std::size_t>(size(rng)));
    const double th_value = th(rng);
    auto lib = filter(v, theta(th_value));
    auto want = greedy_reference(v, th_value);
    CHECK(ids(lib.buys) == want.buys);
    CHECK(ids(lib.sells) == want.sells);
    std::vector<std::pair<std::int64_t, std::int64_t>> rejected;
    for (const auto& d : lib.decisions)
      if (!d.admitted) rejected.push_back({d.item.pattern.id, *d.blocked_by});
    CHECK(rejected == want.rejected);
    CHECK(verify(lib).passed);
    if (!v.empty()) CHECK(lib.decisions.front().admitted);
  }
}

TEST_CASE("admitted count is non-increasing in theta when one side ranks first") {
  // distinct cross distances: Buys at 2^i, Sells at 3^j + 0.5 on one axis
  std::vector<ScoredPattern> v;
  for (int i = 0; i < 6; ++i) v.push_back(scored(i, Label::Buy, on_axis(std::pow(2.0, i)), 1.0 - 0.01 * i));
  for (int j = 0; j < 6; ++j)
    v.push_back(scored(10 + j, Label::Sell, on_axis(std::pow(3.0, j) + 0.5), 0.5 - 0.01 * j));
  std::sort(v.begin(), v.end(), ranks_before);
  std::size_t prev = v.size() + 1;
  for (double t = 0.25; t < 300; t *= 1.3) {
    auto lib = filter(v, theta(t));
    const auto n = lib.buys.size() + lib.sells.size();
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("interleaved scores can break theta monotonicity") {
  // At theta 3 the Sell at 2 is admitted and blocks both later Buys; at
  // theta 5 the Sell is rejected by the first Buy and the later Buys pass.
  std::vector<ScoredPattern> v{scored(0, Label::Buy, on_axis(-2.5), 0.9), scored(1, Label::Sell, on_axis(2), 0.8),
                               scored(2, Label::Buy, on_axis(3), 0.7), scored(3, Label::Buy, on_axis(3.5), 0.6)};
  auto small = filter(v, theta(3)), large = filter(v, theta(5));
  CHECK(small.buys.size() + small.sells.size() == 2);
  CHECK(large.buys.size() + large.sells.size() == 3);
}

TEST_CASE("default theta is the 5th percentile of cross distances") {
  std::vector<Pattern> v;
  for (int i = 0; i < 5; ++i) v.push_back(pattern(i, Label::Buy, on_axis(i)));
  for (int j = 0; j < 4; ++j) v.push_back(pattern(10 + j, Label::Sell, on_axis(10 + 3 * j)));
  // 20 distances; sorted, position 0.05 * 19 = 0.95 between the two smallest
  std::vector<double> d;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) d.push_back(std::fabs(10 + 3 * j - i));
  std::sort(d.begin(), d.end());
  CHECK(default_theta(v) == doctest::Approx(d[0] + 0.95 * (d[1] - d[0])).epsilon(1e-12));
  std::vector<Pattern> one_side(v.begin(), v.begin() + 5);
  CHECK(error_of([&] { default_theta(one_side); }) == ErrorCode::EmptySide);
}
