#include "qpat/market_data.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "qpat/error.hpp"
#include "qpat/text.hpp"

namespace qpat {

using namespace std::chrono;

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

std::optional<Timestamp> make_timestamp(int y, int mo, int d, int h, int mi, int s) {
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s != 0) return std::nullopt;
  return Timestamp{sys_days{ymd}} + hours{h} + minutes{mi};
}

// "YYYYMMDD HHMMSS"
std::optional<Timestamp> parse_histdata_stamp(std::string_view f) {
  if (f.size() != 15 || f[8] != ' ') return std::nullopt;
  auto date = f.substr(0, 8);
  auto time = f.substr(9, 6);
  if (!all_digits(date) || !all_digits(time)) return std::nullopt;
  return make_timestamp(to_int(date.substr(0, 4)), to_int(date.substr(4, 2)), to_int(date.substr(6, 2)),
                        to_int(time.substr(0, 2)), to_int(time.substr(2, 2)), to_int(time.substr(4, 2)));
}

[[noreturn]] void malformed(std::size_t line_no, std::string_view line, std::string_view why) {
  std::ostringstream msg;
  msg << "line " << line_no << ": " << why << ": '" << line << "'";
  throw Error(ErrorCode::MalformedLine, msg.str());
}

void check_order(const std::vector<OhlcBar>& bars, const OhlcBar& next, std::size_t line_no) {
  if (bars.empty()) return;
  if (next.timestamp <= bars.back().timestamp) {
    std::ostringstream msg;
    msg << "line " << line_no << ": timestamp " << format_iso8601(next.timestamp)
        << (next.timestamp == bars.back().timestamp ? " duplicates" : " precedes")
        << " previous " << format_iso8601(bars.back().timestamp);
    throw Error(ErrorCode::NonMonotonicTimestamp, msg.str());
  }
}

void check_bar(const OhlcBar& bar, std::size_t line_no) {
  if (!is_valid(bar)) {
    std::ostringstream msg;
    msg << "line " << line_no << ": OHLC out of range at " << format_iso8601(bar.timestamp);
    throw Error(ErrorCode::InvalidBar, msg.str());
  }
}

}  // namespace

bool is_valid(const OhlcBar& bar) {
  return bar.low <= bar.open && bar.open <= bar.high && bar.low <= bar.close &&
         bar.close <= bar.high;
}

bool contiguous(const OhlcBar& a, const OhlcBar& b, int interval_minutes) {
  return b.timestamp - a.timestamp == minutes{interval_minutes};
}

BarSeries parse_histdata_csv(std::string_view textv, std::string symbol) {
  BarSeries series;
  series.symbol = std::move(symbol);
  series.interval_minutes = 1;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < textv.size()) {
    auto eol = textv.find('\n', pos);
    if (eol == std::string_view::npos) eol = textv.size();
    std::string_view raw = textv.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    auto line = text::trim(raw);
    if (line.empty()) continue;

    auto fields = text::split(line, ';');
    if (fields.size() != 6) malformed(line_no, line, "expected 6 ';'-separated fields");
    auto ts = parse_histdata_stamp(fields[0]);
    if (!ts) malformed(line_no, line, "bad timestamp");
    double px[5];
    for (int i = 0; i < 5; ++i) {
      auto v = text::parse_double(fields[i + 1]);
      if (!v) malformed(line_no, line, "bad number");
      px[i] = *v;
    }
    OhlcBar bar{*ts, px[0], px[1], px[2], px[3]};
    check_order(series.bars, bar, line_no);
    check_bar(bar, line_no);
    series.bars.push_back(bar);
  }
  return series;
}

BarSeries parse_histdata_csv(std::istream& in, std::string symbol) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_histdata_csv(buf.str(), std::move(symbol));
}

AggregatedSeries aggregate_counted(const BarSeries& series, int target_minutes,
                                   const AggregateOptions& options) {
  const int source = series.interval_minutes;
  if (source <= 0 || target_minutes <= 0 || target_minutes % source != 0) {
    std::ostringstream msg;
    msg << "target interval " << target_minutes << " is not a positive multiple of " << source;
    throw Error(ErrorCode::IntervalMismatch, msg.str());
  }

  AggregatedSeries out;
  out.series.symbol = series.symbol;
  out.series.interval_minutes = target_minutes;

  const minutes width{target_minutes};
  for (const auto& bar : series.bars) {
    // floor to the bucket start; epoch alignment equals clock alignment for
    // any width dividing a day
    auto since = bar.timestamp.time_since_epoch();
    auto rem = since % width;
    if (rem < minutes{0}) rem += width;
    Timestamp bucket = bar.timestamp - rem;

    if (!out.series.bars.empty() && out.series.bars.back().timestamp == bucket) {
      auto& agg = out.series.bars.back();
      agg.high = std::max(agg.high, bar.high);
      agg.low = std::min(agg.low, bar.low);
      agg.close = bar.close;
      ++out.source_counts.back();
    } else {
      out.series.bars.push_back(OhlcBar{bucket, bar.open, bar.high, bar.low, bar.close});
      out.source_counts.push_back(1);
    }
  }

  const auto ratio = static_cast<std::size_t>(target_minutes / source);
  if (options.drop_partial && !out.source_counts.empty() && out.source_counts.back() < ratio) {
    out.series.bars.pop_back();
    out.source_counts.pop_back();
  }
  return out;
}

BarSeries aggregate(const BarSeries& series, int target_minutes, const AggregateOptions& options) {
  return aggregate_counted(series, target_minutes, options).series;
}

BarSeries concat(std::vector<BarSeries> parts) {
  BarSeries out;
  bool first = true;
  for (auto& part : parts) {
    if (first) {
      out.symbol = part.symbol;
      out.interval_minutes = part.interval_minutes;
      first = false;
    } else if (part.interval_minutes != out.interval_minutes) {
      throw Error(ErrorCode::IntervalMismatch, "cannot concatenate series of different intervals");
    }
    for (const auto& bar : part.bars) {
      if (!out.bars.empty() && bar.timestamp <= out.bars.back().timestamp)
        throw Error(ErrorCode::NonMonotonicTimestamp,
                    "input files overlap at " + format_iso8601(bar.timestamp));
      out.bars.push_back(bar);
    }
  }
  return out;
}

std::string format_iso8601(Timestamp ts) {
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{ts - day_point};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()));
  return buf;
}

Timestamp parse_iso8601(std::string_view s) {
  s = text::trim(s);
  // YYYY-MM-DDTHH:MM[:SS]
  auto bad = [&] { return Error(ErrorCode::MalformedArtifact, "bad timestamp '" + std::string(s) + "'"); };
  if (s.size() != 16 && s.size() != 19) throw bad();
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') throw bad();
  if (s.size() == 19 && s[16] != ':') throw bad();
  auto y = s.substr(0, 4), mo = s.substr(5, 2), d = s.substr(8, 2), h = s.substr(11, 2),
       mi = s.substr(14, 2);
  std::string_view sec = s.size() == 19 ? s.substr(17, 2) : std::string_view{"00"};
  for (auto part : {y, mo, d, h, mi, sec})
    if (!all_digits(part)) throw bad();
  auto ts = make_timestamp(to_int(y), to_int(mo), to_int(d), to_int(h), to_int(mi), to_int(sec));
  if (!ts) throw bad();
  return *ts;
}

void write_bars_csv(std::ostream& out, const BarSeries& series) {
  out << "timestamp_iso8601,open,high,low,close\n";
  for (const auto& b : series.bars) {
    out << format_iso8601(b.timestamp) << ',' << text::format_double(b.open) << ','
        << text::format_double(b.high) << ',' << text::format_double(b.low) << ','
        << text::format_double(b.close) << '\n';
  }
}

BarSeries read_bars_csv(std::istream& in, int interval_minutes, std::string symbol) {
  BarSeries series;
  series.symbol = std::move(symbol);
  series.interval_minutes = interval_minutes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto v = text::trim(line);
    if (v.empty() || v.front() == '#') continue;
    if (line_no == 1 && v.rfind("timestamp", 0) == 0) continue;
    auto f = text::split(v, ',');
    if (f.size() != 5) malformed(line_no, v, "expected 5 ',' separated fields");
    OhlcBar bar;
    bar.timestamp = parse_iso8601(f[0]);
    double px[4];
    for (int i = 0; i < 4; ++i) {
      auto p = text::parse_double(f[i + 1]);
      if (!p) malformed(line_no, v, "bad number");
      px[i] = *p;
    }
    bar.open = px[0];
    bar.high = px[1];
    bar.low = px[2];
    bar.close = px[3];
    check_order(series.bars, bar, line_no);
    check_bar(bar, line_no);
    series.bars.push_back(bar);
  }
  return series;
}

}  // namespace qpat
