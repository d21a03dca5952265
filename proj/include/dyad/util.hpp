#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dyad {

std::uint64_t fnv1a64(std::string_view data);

/// Shortest decimal that round-trips the double.
std::string format_double(double x);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Strict full-string numeric parsing; throws std::invalid_argument.
double parse_double(const std::string& s);
long parse_long(const std::string& s);
bool parse_bool(const std::string& s);

}  // namespace dyad
