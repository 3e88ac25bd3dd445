#pragma once

// Streaming reader for headered comma-separated tables. Fields are plain
// text without quoting or escapes; blank lines are skipped. All errors are
// reported as ParseError with "path:line" context.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "episim/types.hpp"

namespace episim {

class CsvFile {
 public:
  explicit CsvFile(std::string path) : path_(std::move(path)), in_(path_) {
    if (!in_) throw ParseError(path_ + ": cannot open file");
    if (!read_line()) throw ParseError(path_ + ": missing header row");
    for (std::size_t i = 0; i < spans_.size(); ++i)
      columns_.emplace_back(field(static_cast<int>(i)));
    if (columns_.empty()) throw ParseError(path_ + ":1: empty header row");
  }

  const std::string& path() const { return path_; }
  const std::vector<std::string>& columns() const { return columns_; }
  int line_number() const { return line_no_; }

  // Advances to the next data row; false at end of file.
  bool next_row() {
    if (!read_line()) return false;
    if (spans_.size() != columns_.size())
      fail("expected " + std::to_string(columns_.size()) + " fields, found " +
           std::to_string(spans_.size()));
    return true;
  }

  std::string_view field(int i) const {
    const auto& [offset, length] = spans_[static_cast<std::size_t>(i)];
    return std::string_view(line_).substr(offset, length);
  }

  std::int64_t int_field(int i) const {
    const std::string_view text = field(i);
    std::int64_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
      fail("'" + std::string(text) + "' is not an integer (column '" +
           columns_[static_cast<std::size_t>(i)] + "')");
    return value;
  }

  double double_field(int i) const {
    const std::string_view text = field(i);
    double value = 0;
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
      fail("'" + std::string(text) + "' is not a number (column '" +
           columns_[static_cast<std::size_t>(i)] + "')");
    return value;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(path_ + ":" + std::to_string(line_no_) + ": " + message);
  }

 private:
  bool read_line() {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      if (line_.empty()) continue;
      split();
      return true;
    }
    return false;
  }

  void split() {
    spans_.clear();
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= line_.size(); ++i) {
      if (i == line_.size() || line_[i] == ',') {
        spans_.emplace_back(begin, i - begin);
        begin = i + 1;
      }
    }
  }

  std::string path_;
  std::ifstream in_;
  std::string line_;
  std::vector<std::pair<std::size_t, std::size_t>> spans_;
  std::vector<std::string> columns_;
  int line_no_ = 0;
};

}  // namespace episim
