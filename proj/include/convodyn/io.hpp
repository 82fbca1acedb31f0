#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace convodyn::io {

// Writes `contents` to a sibling temp file and renames it over `path`, so a
// reader never observes a partially written artifact.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Splits file contents into lines, accepting both \n and \r\n endings.
std::vector<std::string> split_lines(std::string_view contents);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

// Parses a full-string decimal; throws ParseError on trailing garbage.
double parse_double(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

// Quotes a CSV cell when it holds a delimiter or quote character or a line break.
std::string csv_escape(std::string_view cell);

}  // namespace convodyn::io
