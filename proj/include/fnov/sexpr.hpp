#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fnov {

/// Minimal SMT-LIB2 s-expression: an atom (symbol, numeral, decimal, or
/// string literal with its quotes) or a list.
struct SExpr {
  std::string atom;
  std::vector<SExpr> items;
  bool is_list = false;

  bool is_atom() const { return !is_list; }
  bool is(std::string_view a) const { return !is_list && atom == a; }
  std::string str() const;
};

struct SExprError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses one expression starting at `pos` (leading whitespace and ;-comments
/// skipped) and advances `pos` past it. Throws SExprError when malformed or
/// unterminated.
SExpr parse_sexpr(std::string_view text, std::size_t& pos);

/// Every complete top-level expression in `text`. Fragments that fail to
/// parse are skipped up to the next line so solver chatter cannot derail the
/// rest of the transcript.
std::vector<SExpr> parse_sexprs_lenient(std::string_view text);

}  // namespace fnov
