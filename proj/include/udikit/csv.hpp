#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace udikit {

// Shortest representation that parses back to the same double.
std::string format_number(double v);
std::string format_optional(const std::optional<double>& v);

double parse_number(std::string_view text, std::string_view context);
std::optional<double> parse_optional_number(std::string_view text, std::string_view context);
long long parse_integer(std::string_view text, std::string_view context);

// Plain comma-separated rows without quoting. Fields must not contain commas
// or line breaks; writers reject such values.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

// Reads `path` and checks that its first line equals `expected_header`.
CsvTable read_csv(const std::filesystem::path& path, std::string_view expected_header);
CsvTable parse_csv(std::string_view text, std::string_view expected_header, std::string_view source);

std::vector<std::string> split_fields(std::string_view line);

// Throws when the field cannot be written into a plain CSV cell.
void check_csv_field(std::string_view field, std::string_view what);

// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

} // namespace udikit
