#include "gsb/io.hpp"

#include <charconv>
#include <fstream>
#include <utility>
#include <vector>

#include "gsb/errors.hpp"

namespace gsb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_integer(const std::string& s, long long& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

long long nonnegative(const std::string& field, const char* what, int line) {
  long long v = 0;
  if (!parse_integer(field, v)) throw InputError(std::string(what) + " '" + field + "' is not an integer", line);
  if (v < 0) throw InputError(std::string(what) + " " + field + " is negative", line);
  return v;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

}  // namespace

EmpiricalDensity read_raw_sample(std::istream& in) {
  std::vector<long long> values;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    values.push_back(nonnegative(s, "value", line));
  }
  if (values.empty()) throw InputError("sample file contains no observations");
  return EmpiricalDensity::from_sample(std::span<const long long>(values));
}

EmpiricalDensity read_frequency_table(std::istream& in) {
  std::vector<std::pair<long long, long long>> rows;
  std::vector<long long> seen;
  std::string raw;
  int line = 0;
  bool first = true;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto comma = s.find(',');
    if (comma == std::string::npos || s.find(',', comma + 1) != std::string::npos) {
      if (first) {
        first = false;
        long long dummy = 0;
        if (!parse_integer(s, dummy)) continue;  // single-column header
      }
      throw InputError("expected 'value,count'", line);
    }
    const std::string a = trim(s.substr(0, comma));
    const std::string b = trim(s.substr(comma + 1));
    long long probe = 0;
    if (first && !parse_integer(a, probe)) {
      first = false;
      continue;  // header row
    }
    first = false;
    const long long value = nonnegative(a, "value", line);
    const long long count = nonnegative(b, "count", line);
    for (long long v : seen) {
      if (v == value) throw InputError("duplicate value " + std::to_string(value), line);
    }
    seen.push_back(value);
    rows.emplace_back(value, count);
  }
  if (rows.empty()) throw InputError("frequency file contains no rows");
  bool positive = false;
  for (const auto& r : rows) positive = positive || r.second > 0;
  if (!positive) throw InputError("frequency file has no positive count");
  return EmpiricalDensity::from_counts(std::span<const std::pair<long long, long long>>(rows));
}

EmpiricalDensity read_raw_sample_file(const std::string& path) {
  auto in = open(path);
  return read_raw_sample(in);
}

EmpiricalDensity read_frequency_file(const std::string& path) {
  auto in = open(path);
  return read_frequency_table(in);
}

}  // namespace gsb
