#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace txanomaly {

/// Shortest decimal form that parses back to the identical double.
std::string format_real(double value);

/// Strict unsigned decimal: digits only, no sign, no whitespace, no overflow.
std::optional<std::uint64_t> parse_unsigned(std::string_view text);

std::optional<double> parse_real(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);

/// Reads a whole file; throws IoError when it cannot be opened.
std::string read_file(const std::string& path);

/// Writes a whole file atomically enough for our purposes (truncate + write + check).
void write_file(const std::string& path, std::string_view content);

}  // namespace txanomaly
