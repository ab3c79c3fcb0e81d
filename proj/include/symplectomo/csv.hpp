// csv.hpp
// Minimal numeric CSV: one header line, comma separated doubles, LF endings.

#pragma once

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "symplectomo/core.hpp"

namespace symplectomo {

struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column, or -1.
  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

namespace detail {
inline std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text, std::size_t line_no) {
  const std::string t = trim(text);
  if (t.empty()) throw Error(ErrorKind::Parse, "empty field on line " + std::to_string(line_no));
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    throw Error(ErrorKind::Parse, "bad number '" + t + "' on line " + std::to_string(line_no));
  }
  return v;
}
}  // namespace detail

inline NumericTable parse_csv(std::istream& in) {
  NumericTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_commas(line);
    if (table.header.empty()) {
      for (const auto& f : fields) table.header.push_back(detail::trim(f));
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                        " fields, expected " + std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(detail::parse_double(f, line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw Error(ErrorKind::Parse, "missing CSV header");
  return table;
}

inline NumericTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return parse_csv(in);
}

/// Checks that the header is exactly `expected`.
inline void require_header(const NumericTable& t, const std::vector<std::string>& expected) {
  if (t.header != expected) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) want += (i ? "," : "") + expected[i];
    throw Error(ErrorKind::Parse, "expected CSV header " + want);
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace symplectomo
