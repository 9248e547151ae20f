#pragma once

// Small text helpers shared by the CSV readers and writers. Doubles are
// written in shortest round-trip form so that re-reading an artifact yields
// bit-identical values.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qpat::text {

std::string format_double(double value);

std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string_view trim(std::string_view s);

}  // namespace qpat::text
