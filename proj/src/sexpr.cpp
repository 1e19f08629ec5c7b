#include "fnov/sexpr.hpp"

#include <cctype>

namespace fnov {

std::string SExpr::str() const {
  if (!is_list) return atom;
  std::string s = "(";
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? " " : "") + items[i].str();
  return s + ")";
}

namespace {

void skip_space(std::string_view text, std::size_t& pos) {
  while (pos < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    } else if (text[pos] == ';') {
      while (pos < text.size() && text[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
}

}  // namespace

SExpr parse_sexpr(std::string_view text, std::size_t& pos) {
  skip_space(text, pos);
  if (pos >= text.size()) throw SExprError("unexpected end of input");

  const char c = text[pos];
  if (c == ')') throw SExprError("unexpected ')' at offset " + std::to_string(pos));
  if (c == '(') {
    SExpr list;
    list.is_list = true;
    ++pos;
    while (true) {
      skip_space(text, pos);
      if (pos >= text.size()) throw SExprError("unterminated list");
      if (text[pos] == ')') {
        ++pos;
        return list;
      }
      list.items.push_back(parse_sexpr(text, pos));
    }
  }

  SExpr atom;
  const std::size_t start = pos;
  if (c == '"') {
    ++pos;
    while (true) {
      if (pos >= text.size()) throw SExprError("unterminated string literal");
      if (text[pos] == '"') {
        // "" is an escaped quote in SMT-LIB 2.6.
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          pos += 2;
          continue;
        }
        ++pos;
        break;
      }
      ++pos;
    }
  } else if (c == '|') {
    ++pos;
    while (pos < text.size() && text[pos] != '|') ++pos;
    if (pos >= text.size()) throw SExprError("unterminated quoted symbol");
    ++pos;
  } else {
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) && text[pos] != '(' &&
           text[pos] != ')' && text[pos] != ';') {
      ++pos;
    }
  }
  atom.atom = std::string(text.substr(start, pos - start));
  return atom;
}

std::vector<SExpr> parse_sexprs_lenient(std::string_view text) {
  std::vector<SExpr> out;
  std::size_t pos = 0;
  while (true) {
    skip_space(text, pos);
    if (pos >= text.size()) break;
    const std::size_t start = pos;
    try {
      out.push_back(parse_sexpr(text, pos));
    } catch (const SExprError&) {
      pos = text.find('\n', start);
      if (pos == std::string_view::npos) break;
    }
  }
  return out;
}

}  // namespace fnov
