#pragma once

// Minimal CSV reader for the benchmark fixtures: comma separated, no quoting,
// '#' starts a comment line, blank lines skipped.

#include <charconv>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spotsim/error.hpp"

namespace spotsim::detail {

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

class CsvTable {
 public:
  CsvTable(std::string_view text, std::string source) : source_(std::move(source)) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (trim(line).empty() || trim(line).front() == '#') continue;
      auto fields = split(line);
      if (!have_header) {
        for (std::size_t i = 0; i < fields.size(); ++i) columns_[fields[i]] = i;
        width_ = fields.size();
        have_header = true;
        continue;
      }
      if (fields.size() != width_)
        throw ParseError(location(line_no) + ": expected " + std::to_string(width_) + " fields, got " +
                         std::to_string(fields.size()));
      rows_.push_back({line_no, std::move(fields)});
    }
    if (!have_header) throw ParseError(source_ + ": missing header line");
  }

  void require_columns(std::initializer_list<const char*> names) const {
    for (const char* n : names)
      if (!columns_.count(n)) throw ParseError(source_ + ": missing column '" + n + "'");
  }

  const std::vector<CsvRow>& rows() const { return rows_; }

  const std::string& field(const CsvRow& row, const char* column) const {
    return row.fields[columns_.at(column)];
  }

  double number(const CsvRow& row, const char* column) const {
    const std::string& s = field(row, column);
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ParseError(location(row.line) + ": column '" + column + "' is not a number: '" + s + "'");
    return v;
  }

  long long integer(const CsvRow& row, const char* column) const {
    const std::string& s = field(row, column);
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ParseError(location(row.line) + ": column '" + column + "' is not an integer: '" + s + "'");
    return v;
  }

  std::string location(std::size_t line) const { return source_ + ":" + std::to_string(line); }

 private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  }

  static std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }

  std::string source_;
  std::map<std::string, std::size_t> columns_;
  std::size_t width_ = 0;
  std::vector<CsvRow> rows_;
};

}  // namespace spotsim::detail
