#pragma once

// Line-oriented block grammar shared by the disease-model and intervention
// file formats:
//
//   key value ...                 # top-level setting
//   kind [name] {                 # block header
//     word word ...               # one statement per line
//   }
//
// '#' starts a comment that runs to end of line. Tokens are separated by
// whitespace. Blocks do not nest. Errors carry "path:line" context.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "episim/types.hpp"

namespace episim {

struct ConfigLine {
  std::vector<std::string> tokens;
  int line = 0;
};

struct ConfigBlock {
  std::string kind;
  std::string name;  // empty when the header has no name token
  std::vector<ConfigLine> lines;
  int line = 0;
};

struct ConfigFile {
  std::string path;
  std::vector<ConfigLine> toplevel;
  std::vector<ConfigBlock> blocks;

  [[noreturn]] void fail(int line, const std::string& message) const {
    throw ParseError(path + ":" + std::to_string(line) + ": " + message);
  }

  double number(const ConfigLine& where, const std::string& token) const {
    double value = 0;
    const auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
      fail(where.line, "'" + token + "' is not a number");
    return value;
  }

  std::int64_t integer(const ConfigLine& where, const std::string& token) const {
    std::int64_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
      fail(where.line, "'" + token + "' is not an integer");
    return value;
  }
};

// Comparison operator used by entry rules and intervention selectors.
enum class CompareOp { kLt, kLe, kGt, kGe, kEq, kNe };

inline bool compare(CompareOp op, double lhs, double rhs) {
  switch (op) {
    case CompareOp::kLt: return lhs < rhs;
    case CompareOp::kLe: return lhs <= rhs;
    case CompareOp::kGt: return lhs > rhs;
    case CompareOp::kGe: return lhs >= rhs;
    case CompareOp::kEq: return lhs == rhs;
    case CompareOp::kNe: return lhs != rhs;
  }
  return false;
}

inline std::optional<CompareOp> parse_compare_op(std::string_view token) {
  if (token == "<") return CompareOp::kLt;
  if (token == "<=") return CompareOp::kLe;
  if (token == ">") return CompareOp::kGt;
  if (token == ">=") return CompareOp::kGe;
  if (token == "==") return CompareOp::kEq;
  if (token == "!=") return CompareOp::kNe;
  return std::nullopt;
}

inline ConfigFile parse_config_text(std::string_view text,
                                    std::string path = "<memory>") {
  ConfigFile file;
  file.path = std::move(path);
  ConfigBlock* open_block = nullptr;

  std::istringstream stream{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);

    ConfigLine line;
    line.line = line_no;
    std::istringstream words(raw);
    std::string word;
    while (words >> word) line.tokens.push_back(word);
    if (line.tokens.empty()) continue;

    if (line.tokens.back() == "{") {
      if (open_block) file.fail(line_no, "blocks do not nest");
      if (line.tokens.size() < 2 || line.tokens.size() > 3)
        file.fail(line_no, "block header must be 'kind [name] {'");
      ConfigBlock block;
      block.kind = line.tokens[0];
      if (line.tokens.size() == 3) block.name = line.tokens[1];
      block.line = line_no;
      file.blocks.push_back(std::move(block));
      open_block = &file.blocks.back();
      continue;
    }
    if (line.tokens.size() == 1 && line.tokens[0] == "}") {
      if (!open_block) file.fail(line_no, "'}' without an open block");
      open_block = nullptr;
      continue;
    }
    if (open_block)
      open_block->lines.push_back(std::move(line));
    else
      file.toplevel.push_back(std::move(line));
  }
  if (open_block)
    file.fail(open_block->line, "block '" + open_block->kind + "' is never closed");
  return file;
}

inline ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

}  // namespace episim
