#include <cmath>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "relent/evogame.hpp"
#include "relent/textio.hpp"

namespace relent {

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> split_whitespace(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    tokens.push_back({line.substr(start, i - start), start + 1});
  }
  return tokens;
}

}  // namespace

GameMatrix parse_game_matrix(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  std::size_t n = 0;
  bool have_size = false;
  std::size_t row = 0;
  Matrix entries;

  while (std::getline(in, raw)) {
    ++line_no;
    const auto tokens = split_whitespace(textio::strip_comment(raw));
    if (tokens.empty()) continue;
    if (!have_size) {
      if (tokens.size() != 1) throw ParseError(line_no, tokens[1].column, "expected a single size n");
      const auto value = textio::parse_double(tokens[0].text);
      if (!value || *value < 1.0 || *value != static_cast<double>(static_cast<std::size_t>(*value))) {
        throw ParseError(line_no, tokens[0].column, "size must be a positive integer");
      }
      n = static_cast<std::size_t>(*value);
      entries = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      have_size = true;
      continue;
    }
    if (row == n) throw ParseError(line_no, tokens[0].column, "more than n rows");
    if (tokens.size() != n) {
      const std::size_t column = tokens.size() > n ? tokens[n].column : raw.size() + 1;
      throw ParseError(line_no, column,
                       "expected " + std::to_string(n) + " entries, found " + std::to_string(tokens.size()));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const auto value = textio::parse_double(tokens[j].text);
      if (!value || !std::isfinite(*value)) {
        throw ParseError(line_no, tokens[j].column, "invalid number '" + std::string(tokens[j].text) + "'");
      }
      entries(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) = *value;
    }
    ++row;
  }
  if (!have_size) throw ParseError(line_no + 1, 1, "missing matrix size");
  if (row != n) throw ParseError(line_no + 1, 1, "expected " + std::to_string(n) + " rows, found " + std::to_string(row));
  return GameMatrix(std::move(entries));
}

GameMatrix parse_game_matrix(const std::string& text) {
  std::istringstream in(text);
  return parse_game_matrix(in);
}

std::string serialize_game_matrix(const GameMatrix& a) {
  std::string out = std::to_string(a.size()) + "\n";
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (j > 0) out += ' ';
      out += textio::format_double(a(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace relent
