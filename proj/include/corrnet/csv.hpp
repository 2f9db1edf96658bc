#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "corrnet/types.hpp"

namespace corrnet::csv {

// Shortest decimal that round-trips to the same double (at most 17 significant
// digits).
std::string format_double(double v);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

// Parses a full field; throws FormatError(file, line) on failure.
double parse_double(std::string_view field, const std::string& file, std::size_t line);
long long parse_int(std::string_view field, const std::string& file, std::size_t line);

// Reads a numeric matrix. When expected_cols >= 0 every row must have that many
// fields; when expected_rows >= 0 the row count must match.
Matrix read_matrix(const std::filesystem::path& path, long expected_rows = -1,
                   long expected_cols = -1);
void write_matrix(const std::filesystem::path& path, const Matrix& m);
void write_matrix(const std::filesystem::path& path, const BinaryMatrix& m);

// Reads all lines (LF separated; a trailing CR is tolerated). Throws FormatError
// naming the file when it cannot be opened.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace corrnet::csv
