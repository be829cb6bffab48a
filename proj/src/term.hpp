#pragma once

// Generic argument terms of the annotation language. Constraints, literals and
// generator calls are all parsed into this shape first and interpreted after.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ancheck/value.hpp"
#include "lexer.hpp"

namespace ancheck::detail {

struct Term {
  enum class Kind {
    Scalar,   // literal scalar in `scalar`
    Name,     // bare identifier: `missing_gen`
    Call,     // name(args...)
    GenCall,  // gen name(args...)
    List,     // [items]
    Tuple,    // (items,)
    Dict,     // {k: v}
  };

  Kind kind = Kind::Scalar;
  Value scalar;
  std::string name;
  std::vector<Term> items;  // positional args / elements / dict keys+values interleaved
  std::vector<std::pair<std::string, Term>> kwargs;
  std::size_t line = 1;
  std::size_t col = 1;
};

Term parse_term(TokenStream& ts);

// Converts a literal-only term to a Value; nullopt when the term contains
// constraint calls, names or generator calls.
std::optional<Value> term_to_value(const Term& t);

// Like term_to_value, but raises SyntaxError naming the offending sub-term.
Value require_value(const Term& t, const std::string& what);

}  // namespace ancheck::detail
