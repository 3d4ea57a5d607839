#pragma once

#include <string>
#include <vector>

namespace gridhub {

using CsvRow = std::vector<std::string>;

/// RFC-4180-ish: comma separators, LF or CRLF rows, double-quote escaping.
/// Throws ParseError on an unterminated quoted field.
std::vector<CsvRow> parse_csv(const std::string& text, const std::string& file_for_errors);

/// Joins one row, quoting only fields that need it.
std::string csv_line(const CsvRow& row);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gridhub
