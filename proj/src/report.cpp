#include "qpat/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "qpat/entropy.hpp"
#include "qpat/error.hpp"
#include "qpat/stats.hpp"
#include "qpat/text.hpp"

namespace qpat {

using text::format_double;

std::string_view to_string(Population population) {
  return population == Population::Raw ? "raw" : "filtered";
}

DistanceHistogram histogram_of(std::vector<double> distances, int bins, Population population) {
  if (bins < 1) throw Error(ErrorCode::InvalidConfig, "histogram needs at least one bin");
  if (distances.empty()) throw Error(ErrorCode::EmptySide, "no distances to histogram");

  DistanceHistogram h;
  h.population = population;
  h.samples = distances.size();
  double sum = 0.0;
  for (double d : distances) sum += d;
  h.mean = sum / static_cast<double>(distances.size());

  std::sort(distances.begin(), distances.end());
  const std::size_t n = distances.size();
  h.median = n % 2 == 1 ? distances[n / 2] : 0.5 * (distances[n / 2 - 1] + distances[n / 2]);
  h.min = distances.front();
  h.max = distances.back();

  const auto nb = static_cast<std::size_t>(bins);
  const double width = (h.max - h.min) / static_cast<double>(nb);
  h.edges.resize(nb + 1);
  for (std::size_t b = 0; b <= nb; ++b) h.edges[b] = h.min + width * static_cast<double>(b);
  h.edges[nb] = h.max;
  h.counts.assign(nb, 0);
  for (double d : distances) {
    std::size_t b = 0;
    if (width > 0.0) b = std::min(nb - 1, static_cast<std::size_t>((d - h.min) / width));
    ++h.counts[b];
  }
  return h;
}

DistanceHistogram cross_distance_histogram(std::span<const FeatureVector> buys,
                                           std::span<const FeatureVector> sells, int bins,
                                           Population population) {
  if (buys.empty() || sells.empty())
    throw Error(ErrorCode::EmptySide, "cross-class histogram needs both Buy and Sell patterns");
  std::vector<double> d;
  d.reserve(buys.size() * sells.size());
  for (const auto& b : buys)
    for (const auto& s : sells) d.push_back(l1_distance(b, s));
  return histogram_of(std::move(d), bins, population);
}

DistanceHistogram all_pairs_distance_histogram(std::span<const FeatureVector> points, int bins,
                                               Population population) {
  if (points.size() < 2) throw Error(ErrorCode::EmptySide, "all-pairs histogram needs two points");
  std::vector<double> d;
  d.reserve(points.size() * (points.size() - 1) / 2);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) d.push_back(l1_distance(points[i], points[j]));
  return histogram_of(std::move(d), bins, population);
}

HistogramShift compare(const DistanceHistogram& raw, const DistanceHistogram& filtered) {
  return {filtered.mean - raw.mean, filtered.median - raw.median};
}

void write_histogram_csv(std::ostream& out, const DistanceHistogram& h) {
  out << "# population=" << to_string(h.population) << '\n'
      << "# samples=" << h.samples << '\n'
      << "# mean=" << format_double(h.mean) << '\n'
      << "# median=" << format_double(h.median) << '\n'
      << "# min=" << format_double(h.min) << '\n'
      << "# max=" << format_double(h.max) << '\n'
      << "bin_left,bin_right,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    out << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "box statistics of empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  BoxStats b;
  b.q1 = stats::quantile_sorted(v, 0.25);
  b.median = stats::quantile_sorted(v, 0.5);
  b.q3 = stats::quantile_sorted(v, 0.75);
  b.mean = stats::mean(v);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (double x : v) {
    if (x >= lo_fence) {
      b.whisker_low = std::min(b.whisker_low, x);
      break;
    }
  }
  for (auto it = v.rbegin(); it != v.rend(); ++it) {
    if (*it <= hi_fence) {
      b.whisker_high = std::max(b.whisker_high, *it);
      break;
    }
  }
  for (double x : v)
    if (x < lo_fence || x > hi_fence) b.outliers.push_back(x);
  return b;
}

VolatilityStats monthly_volatility(const BarSeries& series, bool sample_std) {
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "volatility of an empty series");
  using namespace std::chrono;
  std::map<std::pair<int, unsigned>, std::vector<double>> by_month;
  for (const auto& bar : series.bars) {
    const year_month_day ymd{floor<days>(bar.timestamp)};
    by_month[{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())}].push_back(bar.open);
  }

  VolatilityStats out;
  for (const auto& [key, opens] : by_month) {
    if (out.years.empty() || out.years.back().year != key.first) out.years.push_back({key.first, {}, {}});
    out.years.back().months.push_back({key.second, stats::stddev(opens, sample_std), opens.size()});
  }
  for (auto& y : out.years) {
    std::vector<double> stds;
    for (const auto& m : y.months) stds.push_back(m.stddev);
    y.box = box_stats(stds);
  }
  return out;
}

void write_volatility_csv(std::ostream& out, const VolatilityStats& stats) {
  out << "year,month,open_std,bars\n";
  for (const auto& y : stats.years)
    for (const auto& m : y.months)
      out << y.year << ',' << m.month << ',' << format_double(m.stddev) << ',' << m.bars << '\n';
  out << "# year,q1,median,q3,whisker_low,whisker_high,mean\n";
  for (const auto& y : stats.years)
    out << "# " << y.year << ',' << format_double(y.box.q1) << ',' << format_double(y.box.median) << ','
        << format_double(y.box.q3) << ',' << format_double(y.box.whisker_low) << ','
        << format_double(y.box.whisker_high) << ',' << format_double(y.box.mean) << '\n';
}

namespace {

constexpr double kWidth = 640, kHeight = 360, kMargin = 48;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string svg_open(std::string_view title) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
    << "</text>\n"
    << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin / 2
    << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
    << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  return s.str();
}

}  // namespace

std::string histogram_svg(const DistanceHistogram& h, std::string_view title) {
  std::ostringstream s;
  s << svg_open(title);
  const double plot_w = kWidth - 1.5 * kMargin, plot_h = kHeight - 2 * kMargin;
  std::size_t peak = 1;
  for (auto c : h.counts) peak = std::max(peak, c);
  const double bar_w = plot_w / static_cast<double>(h.counts.size());
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double bh = plot_h * static_cast<double>(h.counts[b]) / static_cast<double>(peak);
    s << "<rect x=\"" << num(kMargin + bar_w * static_cast<double>(b)) << "\" y=\""
      << num(kHeight - kMargin - bh) << "\" width=\"" << num(std::max(bar_w - 1, 0.5)) << "\" height=\""
      << num(bh) << "\" fill=\"steelblue\"/>\n";
  }
  s << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin + 16 << "\">" << num(h.min) << "</text>\n"
    << "<text x=\"" << kWidth - kMargin / 2 << "\" y=\"" << kHeight - kMargin + 16
    << "\" text-anchor=\"end\">" << num(h.max) << "</text>\n"
    << "<text x=\"" << kWidth - kMargin / 2 << "\" y=\"40\" text-anchor=\"end\">mean " << num(h.mean)
    << "  median " << num(h.median) << "  n " << h.samples << "</text>\n"
    << "</svg>\n";
  return s.str();
}

std::string volatility_svg(const VolatilityStats& stats, std::string_view title) {
  std::ostringstream s;
  s << svg_open(title);
  double top = 0.0;
  for (const auto& y : stats.years)
    for (const auto& m : y.months) top = std::max(top, m.stddev);
  if (top <= 0.0) top = 1.0;
  const double plot_w = kWidth - 1.5 * kMargin, plot_h = kHeight - 2 * kMargin;
  const double slot = plot_w / static_cast<double>(std::max<std::size_t>(1, stats.years.size()));
  auto ypix = [&](double v) { return kHeight - kMargin - plot_h * v / top; };
  for (std::size_t i = 0; i < stats.years.size(); ++i) {
    const auto& y = stats.years[i];
    const double cx = kMargin + slot * (static_cast<double>(i) + 0.5);
    const double half = slot * 0.25;
    s << "<line x1=\"" << num(cx) << "\" y1=\"" << num(ypix(y.box.whisker_low)) << "\" x2=\"" << num(cx)
      << "\" y2=\"" << num(ypix(y.box.whisker_high)) << "\" stroke=\"black\"/>\n"
      << "<rect x=\"" << num(cx - half) << "\" y=\"" << num(ypix(y.box.q3)) << "\" width=\"" << num(2 * half)
      << "\" height=\"" << num(std::max(0.5, ypix(y.box.q1) - ypix(y.box.q3)))
      << "\" fill=\"lightsteelblue\" stroke=\"black\"/>\n"
      << "<line x1=\"" << num(cx - half) << "\" y1=\"" << num(ypix(y.box.median)) << "\" x2=\""
      << num(cx + half) << "\" y2=\"" << num(ypix(y.box.median)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (double o : y.box.outliers)
      s << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(ypix(o)) << "\" r=\"2\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << num(cx) << "\" y=\"" << kHeight - kMargin + 16 << "\" text-anchor=\"middle\">" << y.year
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace qpat
