#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ehrcsd::text {

std::vector<std::string> split(std::string_view line, char delimiter);
std::string_view trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view delimiter);

/// Shortest round-trippable decimal ("%.17g" trimmed); "inf"/"nan" spelled out.
std::string format_double(double value);
/// Fixed number of significant digits, used for human-facing tables.
std::string format_double(double value, int significant);

double parse_double(std::string_view s, std::string_view what);
std::int64_t parse_int(std::string_view s, std::string_view what);

/// FNV-1a 64-bit, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

} // namespace ehrcsd::text
