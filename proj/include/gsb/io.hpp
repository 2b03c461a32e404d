#pragma once

#include <istream>
#include <string>

#include "gsb/estimation.hpp"

namespace gsb {

/// One nonnegative integer per line. Blank lines and lines starting with '#'
/// are skipped. Errors carry the 1-based line number.
EmpiricalDensity read_raw_sample(std::istream& in);

/// CSV rows `value,count`; the first non-blank line may be a header.
EmpiricalDensity read_frequency_table(std::istream& in);

EmpiricalDensity read_raw_sample_file(const std::string& path);
EmpiricalDensity read_frequency_file(const std::string& path);

}  // namespace gsb
