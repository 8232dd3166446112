#pragma once

#include <optional>
#include <string>
#include <vector>

namespace polymodel {

/// Shortest decimal string that round-trips to the same double.
std::string fmt_double(double v);

/// Strict double parse of an entire field. Throws ParseError with `context`.
double parse_double(const std::string& field, const std::string& context);

/// Splits one CSV line on commas. No quoting: ids and numbers only.
std::vector<std::string> split_csv_line(const std::string& line);

/// Reads all lines, dropping a trailing empty line. Throws ParseError if the
/// file cannot be opened.
std::vector<std::string> read_lines(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace polymodel
