#include "mvpln/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mvpln {

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string matrix_to_csv(const Matrix& M, const std::string& col_prefix,
                          bool as_integer) {
  std::string out;
  for (Index c = 0; c < M.cols(); ++c) {
    if (c) out += ',';
    out += col_prefix + std::to_string(c + 1);
  }
  out += '\n';
  for (Index r = 0; r < M.rows(); ++r) {
    for (Index c = 0; c < M.cols(); ++c) {
      if (c) out += ',';
      if (as_integer) {
        out += std::to_string(static_cast<long long>(std::llround(M(r, c))));
      } else {
        out += format_double(M(r, c));
      }
    }
    out += '\n';
  }
  return out;
}

void write_matrix_csv(const std::string& path, const Matrix& M,
                      const std::string& col_prefix, bool as_integer) {
  atomic_write_file(path, matrix_to_csv(M, col_prefix, as_integer));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split_csv_record(const std::string& line, int lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted)
    throw parse_error("unterminated quoted field", lineno,
                      int(fields.size()) + 1);
  fields.push_back(cur);
  return fields;
}

double parse_field(const std::string& field, int lineno, int col) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw parse_error("cannot parse number '" + field + "'", lineno, col);
  return value;
}

}  // namespace

Matrix read_matrix_csv(const std::string& path,
                       std::vector<std::string>* header_out) {
  const std::string text = read_file(path);
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw parse_error("empty file: " + path, 1, 1);

  const auto header = split_csv_record(lines[0], 1);
  if (header_out) *header_out = header;
  const size_t ncol = header.size();
  if (lines.size() < 2) throw parse_error("no data rows in " + path, 1, 1);

  Matrix M(Index(lines.size() - 1), Index(ncol));
  for (size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_csv_record(lines[r], int(r) + 1);
    if (fields.size() != ncol)
      throw parse_error("expected " + std::to_string(ncol) + " fields, got " +
                            std::to_string(fields.size()),
                        int(r) + 1, 1);
    for (size_t c = 0; c < ncol; ++c)
      M(Index(r - 1), Index(c)) = parse_field(fields[c], int(r) + 1, int(c) + 1);
  }
  return M;
}

Matrix read_counts_csv(const std::string& path) {
  const Matrix M = read_matrix_csv(path);
  for (Index r = 0; r < M.rows(); ++r) {
    for (Index c = 0; c < M.cols(); ++c) {
      const double v = M(r, c);
      if (!std::isfinite(v) || v < 0.0 || v != std::floor(v))
        throw parse_error("count at data row " + std::to_string(r + 1) +
                              ", column " + std::to_string(c + 1) +
                              " is not a nonnegative integer",
                          int(r) + 2, int(c) + 1);
    }
  }
  return M;
}

}  // namespace mvpln
