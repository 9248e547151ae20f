#include "qpat/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>

#include "qpat/error.hpp"

namespace qpat::fixtures {

using namespace std::chrono;

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * static_cast<double>(hi - lo + 1));
  }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

OhlcBar make_bar(Timestamp ts, double open, double close, double upper, double lower) {
  return OhlcBar{ts, open, std::max(open, close) + upper, std::min(open, close) - lower, close};
}

double cents(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

PlantedSeries planted_ramps(std::uint64_t seed, std::size_t bars, std::size_t ramps) {
  Rng rng(seed);
  PlantedSeries out;
  out.series.symbol = "SYNTH";
  out.series.interval_minutes = 30;
  const Timestamp start{sys_days{year{2017} / 1 / 2}};
  auto background = [](std::size_t i) {
    const double x = static_cast<double>(i);
    return 1000.0 + 0.01 * x + std::sin(2.0 * std::numbers::pi * x / 37.0);
  };

  std::vector<std::size_t> offsets;
  const std::size_t spacing = ramps ? (bars - 40) / ramps : bars;
  for (std::size_t r = 0; r < ramps; ++r) {
    const auto jitter = static_cast<std::size_t>(rng.uniform() * static_cast<double>(spacing - 24));
    offsets.push_back(20 + r * spacing + jitter);
  }

  auto& v = out.series.bars;
  double prev_close = background(0);
  std::size_t next = 0;
  for (std::size_t i = 0; i < bars;) {
    const Timestamp ts = start + minutes{30 * static_cast<long>(i)};
    if (next < offsets.size() && i == offsets[next] + 7 && i + 5 <= bars) {
      const double level = prev_close;
      const auto at = [&](std::size_t k) { return start + minutes{30 * static_cast<long>(i + k)}; };
      v.push_back(OhlcBar{at(0), level, level + 0.3, level - 8.3, level - 8.0});
      v.push_back(OhlcBar{at(1), level - 8.0, level + 12.0, level - 8.3, level + 11.0});
      v.push_back(OhlcBar{at(2), level + 11.0, level + 11.3, level + 6.7, level + 7.0});
      v.push_back(OhlcBar{at(3), level + 7.0, level + 7.3, level + 2.7, level + 3.0});
      const double settle = background(i + 4);
      v.push_back(make_bar(at(4), level + 3.0, settle, 0.3, 0.3));
      out.planted_origins.push_back(start + minutes{30 * static_cast<long>(offsets[next])});
      prev_close = settle;
      i += 5;
      ++next;
      continue;
    }
    const double close = background(i);
    v.push_back(make_bar(ts, prev_close, close, 0.3, 0.3));
    prev_close = close;
    ++i;
  }
  return out;
}

namespace {

struct Motif {
  std::array<double, kWindowBars> body;
  std::array<double, kWindowBars> upper;
  std::array<double, kWindowBars> lower;
};

// rally precursor, selloff precursor, indecisive
const std::array<Motif, 3> kMotifs = {{
    {{-3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 1.0, 1.5},
     {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0},
     {2.5, 2.5, 2.5, 2.5, 2.5, 2.5, 1.0, 1.0}},
    {{3.0, 2.5, 2.0, 1.5, 1.0, 0.5, -1.0, -1.5},
     {2.5, 2.5, 2.5, 2.5, 2.5, 2.5, 1.0, 1.0},
     {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}},
    {{2.0, -2.0, 2.0, -2.0, 2.0, -2.0, 2.0, -2.0},
     {3.5, 3.5, 3.5, 3.5, 3.5, 3.5, 3.5, 3.5},
     {3.5, 3.5, 3.5, 3.5, 3.5, 3.5, 3.5, 3.5}},
}};

}  // namespace

BarSeries market_fixture(std::uint64_t seed, const MarketFixtureOptions& options) {
  Rng rng(seed);
  BarSeries series;
  series.symbol = "SYNTH";
  series.interval_minutes = 30;

  std::vector<Timestamp> stamps;
  for (sys_days d = options.start; static_cast<int>(stamps.size()) < options.trading_days * 48; d += days{1}) {
    const weekday wd{d};
    if (wd == Saturday || wd == Sunday) continue;
    for (int b = 0; b < 48; ++b) stamps.push_back(Timestamp{d} + minutes{30 * b});
  }

  const double anchor = 1200.0;
  double price = anchor;
  std::size_t next_motif = static_cast<std::size_t>(rng.integer(options.motif_spacing_min, options.motif_spacing_max));
  auto& bars = series.bars;
  std::size_t i = 0;
  while (i < stamps.size()) {
    if (i == next_motif && i + kWindowBars + 4 <= stamps.size()) {
      const auto kind = static_cast<std::size_t>(rng.integer(0, 2));
      const auto& m = kMotifs[kind];
      for (std::size_t j = 0; j < kWindowBars; ++j) {
        const double body = m.body[j] + 0.4 * rng.normal();
        const double up = std::max(0.0, m.upper[j] + 0.4 * rng.normal());
        const double lo = std::max(0.0, m.lower[j] + 0.4 * rng.normal());
        bars.push_back(make_bar(stamps[i + j], price, price + body, up, lo));
        price += body;
      }
      const double entry = price;
      bool rally = kind == 0 || (kind == 2 && rng.uniform() < 0.5);
      const double dir = rally ? 1.0 : -1.0;
      const double swing = rng.uniform(18.0, 26.0);
      const double half = entry + dir * 0.5 * swing;
      const double full = entry + dir * swing;
      bars.push_back(make_bar(stamps[i + 8], entry, half, 0.5, 0.5));
      bars.push_back(make_bar(stamps[i + 9], half, full, 0.5, 0.5));
      price = full;
      for (std::size_t j = 10; j < 12; ++j) {
        const double close = price + 0.5 * rng.normal();
        bars.push_back(make_bar(stamps[i + j], price, close, std::abs(0.4 * rng.normal()),
                                std::abs(0.4 * rng.normal())));
        price = close;
      }
      i += 12;
      next_motif = i + static_cast<std::size_t>(rng.integer(options.motif_spacing_min, options.motif_spacing_max));
      continue;
    }
    const double close = price + 0.5 * rng.normal() + 0.01 * (anchor - price);
    bars.push_back(make_bar(stamps[i], price, close, std::abs(0.4 * rng.normal()), std::abs(0.4 * rng.normal())));
    price = close;
    ++i;
  }

  for (auto& b : bars) {
    b.open = cents(b.open);
    b.close = cents(b.close);
    b.high = std::max({cents(b.high), b.open, b.close});
    b.low = std::min({cents(b.low), b.open, b.close});
  }
  return series;
}

void write_histdata_minutes(std::ostream& out, const BarSeries& bars30) {
  const int per = bars30.interval_minutes;
  char line[128];
  for (const auto& b : bars30.bars) {
    // open -> first extreme -> second extreme -> close
    const bool high_first = b.close < b.open;
    const double a = high_first ? b.high : b.low;
    const double c = high_first ? b.low : b.high;
    const int t1 = per / 3, t2 = 2 * per / 3;
    auto path = [&](int t) {
      auto lerp = [](double x, double y, double f) { return x + (y - x) * f; };
      if (t <= t1) return lerp(b.open, a, static_cast<double>(t) / t1);
      if (t <= t2) return lerp(a, c, static_cast<double>(t - t1) / (t2 - t1));
      return lerp(c, b.close, static_cast<double>(t - t2) / (per - t2));
    };
    double prev = b.open;
    for (int m = 0; m < per; ++m) {
      const double close = std::clamp(cents(path(m + 1)), b.low, b.high);
      const double hi = std::max(prev, close);
      const double lo = std::min(prev, close);
      const Timestamp ts = b.timestamp + minutes{m};
      const auto day_point = floor<days>(ts);
      const year_month_day ymd{day_point};
      const hh_mm_ss hms{ts - day_point};
      std::snprintf(line, sizeof(line), "%04d%02u%02u %02d%02d00;%.2f;%.2f;%.2f;%.2f;0\n",
                    static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                    static_cast<unsigned>(ymd.day()), static_cast<int>(hms.hours().count()),
                    static_cast<int>(hms.minutes().count()), prev, hi, lo, close);
      out << line;
      prev = close;
    }
  }
}

std::vector<Pattern> blob_patterns(std::uint64_t seed, const std::vector<BlobSpec>& blobs) {
  Rng rng(seed);
  std::vector<Pattern> out;
  const Timestamp start{sys_days{year{2017} / 1 / 2}};
  for (const auto& blob : blobs) {
    Rng dir_rng(blob.direction_seed);
    FeatureVector center{};
    double norm = 0.0;
    for (auto& c : center) {
      c = dir_rng.normal();
      norm += c * c;
    }
    norm = std::sqrt(norm);
    for (auto& c : center) c = norm > 0.0 ? blob.center_offset * c / norm : 0.0;

    auto emit = [&](Label label) {
      Pattern p;
      p.id = static_cast<std::int64_t>(out.size());
      p.origin = start + minutes{30 * p.id};
      for (std::size_t d = 0; d < kFeatureCount; ++d) p.features[d] = center[d] + blob.spread * rng.normal();
      p.label = label;
      p.pnl_raw = rng.uniform(15.0, 40.0);
      out.push_back(p);
    };
    for (std::size_t i = 0; i < blob.buys; ++i) emit(Label::Buy);
    for (std::size_t i = 0; i < blob.sells; ++i) emit(Label::Sell);
  }
  return out;
}

std::vector<Pattern> mixed_region_patterns(std::uint64_t seed) {
  return blob_patterns(seed, {
                                 {150, 0, 40.0, 1, 1.5},   // pure Buy
                                 {0, 150, -40.0, 1, 1.5},  // pure Sell, opposite side
                                 {100, 100, 0.0, 1, 1.5},  // contradictory, on the boundary
                             });
}

std::vector<Pattern> skew_patterns(std::uint64_t seed) {
  return blob_patterns(seed, {
                                 {180, 220, 0.0, 0, 1.0},  // dense, mixed
                                 {60, 0, 30.0, 7, 3.0},    // sparse, pure, far
                             });
}

DatasetInfo write_market_dataset(const std::filesystem::path& dir, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const auto train = market_fixture(seed);
  MarketFixtureOptions later;
  later.start = sys_days{year{2017} / 9 / 4};
  later.trading_days = 60;
  const auto test = market_fixture(seed + 1, later);

  auto dump = [&](const std::filesystem::path& p, const BarSeries& bars) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::MissingArtifact, "cannot write " + p.string());
    write_histdata_minutes(out, bars);
  };
  dump(dir / "fixture_train.csv", train);
  dump(dir / "fixture_test.csv", test);

  std::ofstream conf(dir / "fixture.conf", std::ios::binary | std::ios::trunc);
  conf << "# Synthetic market fixture. Paths resolve against this file's directory.\n"
       << "symbol = XAUUSD\n"
       << "train = fixture_train.csv\n"
       << "test = fixture_test.csv\n"
       << "interval = 30\n"
       << "seed = " << seed << '\n'
       << "out = qpat-out\n";
  return {train.size(), test.size()};
}

}  // namespace qpat::fixtures
