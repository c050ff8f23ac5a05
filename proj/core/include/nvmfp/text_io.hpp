#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nvmfp::text {

// Locale-independent number formatting.
std::string fixed(double v, int decimals);
// Shortest form with at most `digits` significant digits ("%.9g"-style).
std::string sig(double v, int digits = 9);

// Strict parsers: the whole token must be consumed. Throw ParseError with
// the given line number on failure.
double parse_double(std::string_view s, std::size_t line = 0);
std::int64_t parse_int(std::string_view s, std::size_t line = 0);
std::uint64_t parse_uint(std::string_view s, std::size_t line = 0);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

// Splits into lines; accepts LF and CRLF. A trailing newline does not yield
// an empty final line.
std::vector<std::string> lines(std::string_view content);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace nvmfp::text
