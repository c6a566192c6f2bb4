#pragma once

#include "mvpln/types.hpp"

#include <string>
#include <vector>

namespace mvpln {

/// Writes content to path via a temp file + rename so readers never see a
/// partial file.
void atomic_write_file(const std::string& path, const std::string& content);

/// Shortest decimal representation that round-trips the value.
std::string format_double(double v);

/// RFC-4180-style matrix file: one header row (col_prefix + 1-based index),
/// then one row per matrix row. as_integer renders entries as integers
/// (counts); otherwise shortest round-trip decimals.
void write_matrix_csv(const std::string& path, const Matrix& M,
                      const std::string& col_prefix, bool as_integer = false);

std::string matrix_to_csv(const Matrix& M, const std::string& col_prefix,
                          bool as_integer = false);

/// Parses a matrix CSV (header row required, LF or CRLF, quoted fields
/// allowed). Throws parse_error with 1-based line/field positions.
Matrix read_matrix_csv(const std::string& path,
                       std::vector<std::string>* header_out = nullptr);

/// read_matrix_csv plus count validation: every entry must be a nonnegative
/// integer; violations name the row and column.
Matrix read_counts_csv(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace mvpln
