#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ttr {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// Display form rounded to `digits` significant digits.
std::string format_sig(double v, int digits);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::string_view trim(std::string_view s);

// Views into `s`; an empty input yields one empty piece.
std::vector<std::string_view> split(std::string_view s, char sep);

// FNV-1a over the resolved configuration text; stamps every artifact.
std::uint64_t fnv1a(std::string_view s);
std::string hex_u64(std::uint64_t v);

}  // namespace ttr
