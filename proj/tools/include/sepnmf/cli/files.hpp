#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sepnmf/matrix.hpp"

namespace sepnmf::cli {

// Writes `bytes` to a sibling temporary file and renames it over `path`, so
// readers never observe a partial file. Creates missing parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

// Parses "1-4,76,101-111" (1-based, inclusive ranges) into sorted, distinct
// 0-based indices. Throws Parse on malformed input.
std::vector<Index> parse_index_ranges(std::string_view text);

// 64-bit FNV-1a over the raw bytes of the doubles, rendered as 16 hex digits.
std::string digest(std::span<const double> values);

// Shortest decimal form that reads back to the same double.
std::string format_double(double v);
// Full-string parse; throws Parse naming `what` on trailing garbage.
double parse_double(std::string_view text, std::string_view what);

}  // namespace sepnmf::cli
