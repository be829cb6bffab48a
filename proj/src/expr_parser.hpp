#pragma once

#include <string>
#include <vector>

#include "ancheck/require.hpp"
#include "lexer.hpp"

namespace ancheck::detail {

struct IdentUse {
  std::string name;
  std::size_t line;
  std::size_t col;
};

// Parses an expression starting at the current token and stops at the first
// token that cannot continue it. Identifier occurrences are appended to
// `idents` for the caller to resolve.
RequireExpr parse_expression(TokenStream& ts, std::vector<IdentUse>& idents);

bool is_reserved_word(std::string_view word);

}  // namespace ancheck::detail
