#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gpett/errors.hpp"

namespace gpett::io {

inline constexpr std::string_view kSchemaLine = "# schema=1";

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

inline std::string format_number(std::uint64_t v) { return std::to_string(v); }
inline std::string format_number(std::int64_t v) { return std::to_string(v); }

struct CsvRow {
  std::size_t line = 0;  ///< 1-based line in the source
  std::vector<std::string> cells;
};

struct CsvTable {
  std::string source;
  std::vector<std::string> comments;  ///< '#' lines, verbatim
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError(source, 1, "missing column '" + std::string(name) + "'");
  }
};

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

/// Comma separated, no quoting. Lines starting with '#' are comments; the
/// first other line is the header. Blank lines are skipped.
inline CsvTable read_csv(std::istream& in, std::string source) {
  CsvTable t;
  t.source = std::move(source);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      t.comments.push_back(line);
      continue;
    }
    auto cells = split_line(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw ParseError(t.source, lineno,
                       "expected " + std::to_string(t.header.size()) + " fields, got " + std::to_string(cells.size()));
    t.rows.push_back({lineno, std::move(cells)});
  }
  if (!have_header) throw ParseError(t.source, lineno, "no header line");
  return t;
}

inline CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return read_csv(in, path.string());
}

inline double parse_double(const CsvTable& t, const CsvRow& row, std::size_t col) {
  const std::string& s = row.cells[col];
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(t.source, row.line, "column '" + t.header[col] + "': not a number: '" + s + "'");
  return v;
}

inline long long parse_integer(const CsvTable& t, const CsvRow& row, std::size_t col) {
  const std::string& s = row.cells[col];
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(t.source, row.line, "column '" + t.header[col] + "': not an integer: '" + s + "'");
  return v;
}

/// Writes the schema comment, a header and rows; LF line endings.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out) {
    out_ << kSchemaLine << '\n';
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
};

inline void write_csv(std::ostream& out, const CsvTable& t) {
  CsvWriter w(out, t.header);
  for (const auto& r : t.rows) w.row(r.cells);
}

/// Opens a file for writing in binary mode so line endings stay LF.
inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace gpett::io
