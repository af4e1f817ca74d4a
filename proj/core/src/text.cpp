#include "qglm/text.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

#include "qglm/errors.hpp"

namespace qglm {

std::string format_g17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string format_fixed(double value, int places) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", places, value);
  return buffer;
}

double parse_double(const std::string& token) {
  const std::string t = trim(token);
  if (t.empty()) throw DataError("expected a number, got an empty field");
  char* end = nullptr;
  const double value = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) {
    throw DataError("not a number: '" + t + "'");
  }
  return value;
}

long long parse_int(const std::string& token) {
  const std::string t = trim(token);
  if (t.empty()) throw DataError("expected an integer, got an empty field");
  char* end = nullptr;
  const long long value = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size()) {
    throw DataError("not an integer: '" + t + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& line, char separator) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == separator) {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(current);
  return fields;
}

std::string trim(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
    --end;
  }
  return text.substr(begin, end - begin);
}

}  // namespace qglm
