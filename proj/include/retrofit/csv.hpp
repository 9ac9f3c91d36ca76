#pragma once

// Minimal RFC 4180 CSV reading/writing plus atomic file output.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace retrofit {

using CsvRow = std::vector<std::string>;

/// Parses CSV text; quoted fields may contain commas, quotes ("") and newlines.
std::vector<CsvRow> parse_csv(std::string_view text);

/// Quotes a field only when it contains a comma, quote, or line break.
std::string csv_field(std::string_view field);
std::string csv_line(std::span<const std::string> fields);

/// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path &path, std::string_view content);
std::string read_file(const std::filesystem::path &path);

/// The generation output format: a "Questions" header, then one question per row.
std::string questions_csv(std::span<const std::string> questions);
std::vector<std::string> read_questions_csv(const std::filesystem::path &path);

}  // namespace retrofit
