#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mwnet::csv {

/// Shortest decimal form that parses back to the identical double.
std::string format(double v);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::vector<std::string> split_line(std::string_view line);

/// Reads a CSV file with a header row into (header, rows).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; throws if absent.
  std::size_t column(std::string_view name) const;
};

Table read(std::istream& in);
Table read_file(const std::filesystem::path& path);

/// Writes text with LF line endings, replacing any existing file.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mwnet::csv
