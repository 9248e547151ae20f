#include "qpat/text.hpp"

#include <charconv>
#include <cmath>

namespace qpat::text {

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  if (value == 0.0) value = 0.0;  // fold -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
  return out;
}

std::optional<long long> parse_int(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  long long out = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
  return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

}  // namespace qpat::text
