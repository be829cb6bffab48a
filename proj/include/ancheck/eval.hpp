#pragma once

// Evaluation of preconditions against an argument binding.

#include <string>
#include <string_view>
#include <variant>

#include "ancheck/require.hpp"
#include "ancheck/value.hpp"

namespace ancheck {

enum class EvalErrorKind {
  TypeMismatch,
  DivisionByZero,
  IndexOutOfRange,
  KeyMissing,
  Overflow,
  UnboundIdentifier,
};

std::string_view eval_error_kind_name(EvalErrorKind k);

struct EvalError {
  EvalErrorKind kind;
  std::string path;  // rendered subexpression that failed
  std::string detail;
  bool operator==(const EvalError&) const = default;
};

using EvalResult = std::variant<bool, EvalError>;
using ValueResult = std::variant<Value, EvalError>;

// Never throws. A non-boolean result is a TypeMismatch at the root.
EvalResult eval(const RequireExpr& e, const Binding& b);

// Evaluates any subexpression to a value.
ValueResult eval_value(const RequireExpr& e, const Binding& b);

// Equality as the precondition language sees it: Int and Float compare
// numerically, NaN is unequal to itself, dicts ignore entry order.
bool loose_eq(const Value& a, const Value& b);

}  // namespace ancheck
