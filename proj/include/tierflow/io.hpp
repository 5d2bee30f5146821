#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tierflow {

/// Round-trip rendering used by every persisted float ("%.17g").
std::string format_exact(double v);
/// Nine significant digits, used for metrics tables.
std::string format_metric(double v);

/// Throws DataError when the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Splits on a single-character delimiter, keeping empty fields.
std::vector<std::string_view> split(std::string_view text, char delim);

/// Parses a whole string as a double or integer; returns false on trailing junk.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, long long& out);

}  // namespace tierflow
