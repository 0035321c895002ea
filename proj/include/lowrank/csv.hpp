#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lowrank::csv {

/// Shortest-safe round-trip text for a double ("%.17g"); non-finite values
/// print as "nan", "inf", "-inf".
std::string format(double value);

/// Empty string for nullopt.
std::string format(const std::optional<double>& value);

/// Splits on commas and parses every field as a double. Surrounding blanks
/// are ignored. Throws ParameterError naming the offending field.
std::vector<double> parse_row(std::string_view line);

/// Splits on `delim` without interpreting the fields.
std::vector<std::string> split(std::string_view line, char delim = ',');

std::string join(const std::vector<std::string>& fields, char delim = ',');

}  // namespace lowrank::csv
