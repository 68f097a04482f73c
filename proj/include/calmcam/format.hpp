#pragma once

#include <string>

namespace calmcam {

/// Shortest decimal form that parses back to the same value.
std::string format_number(double value);
std::string format_number(long long value);

/// Fixed-point with `decimals` digits; negative zero prints as zero.
std::string format_fixed(double value, int decimals);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace calmcam
