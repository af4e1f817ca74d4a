#pragma once

#include <string>
#include <vector>

namespace qglm {

// Round-trip-safe decimal rendering (%.17g).
std::string format_g17(double value);

// Fixed-point rendering with the given number of decimal places.
std::string format_fixed(double value, int places);

// Strict parsers; throw DataError on anything but a full numeric token.
double parse_double(const std::string& token);
long long parse_int(const std::string& token);

std::vector<std::string> split(const std::string& line, char separator);
std::string trim(const std::string& text);

}  // namespace qglm
