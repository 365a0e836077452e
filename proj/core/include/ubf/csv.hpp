#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ubf {

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field when it contains a comma, quote or leading/trailing space.
std::string csv_escape(std::string_view field);

std::string join_csv(const std::vector<std::string>& fields);

/// Parses a full number; throws ParseError naming `what` otherwise.
double parse_number(std::string_view text, std::string_view what);

/// Non-empty lines of a CSV document with comment ('#') lines removed.
/// Comment lines are returned separately, in order, without the leading '#'.
struct CsvDocument {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> records;
};

CsvDocument parse_csv(std::string_view text);

}  // namespace ubf
