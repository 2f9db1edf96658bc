#include "corrnet/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "corrnet/error.hpp"

namespace corrnet::csv {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw InternalError("to_chars failed");
  return std::string(buf, end);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

double parse_double(std::string_view field, const std::string& file, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw FormatError(file, line, "cannot parse number '" + std::string(field) + "'");
  }
  return v;
}

long long parse_int(std::string_view field, const std::string& file, std::size_t line) {
  field = trim(field);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw FormatError(file, line, "cannot parse integer '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), 0, "cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

Matrix read_matrix(const std::filesystem::path& path, long expected_rows, long expected_cols) {
  const auto file = path.string();
  const auto lines = read_lines(path);
  if (expected_rows >= 0 && static_cast<long>(lines.size()) != expected_rows) {
    throw FormatError(file, lines.size(),
                      "expected " + std::to_string(expected_rows) + " rows, found " +
                          std::to_string(lines.size()));
  }
  long cols = expected_cols;
  if (cols < 0 && !lines.empty()) cols = static_cast<long>(split(lines.front()).size());
  Matrix m(static_cast<Eigen::Index>(lines.size()), std::max(cols, 0L));
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto fields = split(lines[r]);
    if (static_cast<long>(fields.size()) != cols) {
      throw FormatError(file, r + 1,
                        "expected " + std::to_string(cols) + " columns, found " +
                            std::to_string(fields.size()));
    }
    for (long c = 0; c < cols; ++c) m(r, c) = parse_double(fields[c], file, r + 1);
  }
  return m;
}

namespace {

template <typename Mat, typename Fmt>
void write_any(const std::filesystem::path& path, const Mat& m, Fmt fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  std::string row;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    row.clear();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) row += ',';
      row += fmt(m(r, c));
    }
    row += '\n';
    out << row;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  write_any(path, m, [](double v) { return format_double(v); });
}

void write_matrix(const std::filesystem::path& path, const BinaryMatrix& m) {
  write_any(path, m, [](std::uint8_t v) { return std::to_string(static_cast<int>(v)); });
}

}  // namespace corrnet::csv
