#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ubf {

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written output.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace ubf
