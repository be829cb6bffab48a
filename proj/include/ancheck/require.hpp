#pragma once

// Precondition expressions: a closed boolean/arithmetic expression language
// over function arguments.

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ancheck/box.hpp"
#include "ancheck/value.hpp"

namespace ancheck {

enum class BinaryOp { Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Mod };
enum class UnaryOp { Not, Neg };
enum class Builtin { Len, TypeOf };

std::string_view op_symbol(BinaryOp op);
std::string_view builtin_name(Builtin fn);

struct Expr;

namespace expr {

struct Literal {
  Value value;
  bool operator==(const Literal&) const = default;
};

struct Ident {
  std::string name;
  bool operator==(const Ident&) const = default;
};

struct Unary {
  UnaryOp op;
  Box<Expr> operand;
  bool operator==(const Unary&) const = default;
};

struct Binary {
  BinaryOp op;
  Box<Expr> lhs;
  Box<Expr> rhs;
  bool operator==(const Binary&) const = default;
};

struct Call {
  Builtin fn;
  Box<Expr> arg;
  bool operator==(const Call&) const = default;
};

struct Index {
  Box<Expr> target;
  Box<Expr> index;
  bool operator==(const Index&) const = default;
};

}  // namespace expr

struct Expr {
  using Node = std::variant<expr::Literal, expr::Ident, expr::Unary,
                            expr::Binary, expr::Call, expr::Index>;
  Node node;

  Expr(Node n) : node(std::move(n)) {}  // NOLINT
  bool operator==(const Expr& other) const { return node == other.node; }
};

using RequireExpr = Expr;

// Parses one precondition. Identifiers must name one of `declared_args`.
// Positions in errors are relative to `text` unless `line`/`col` give the
// location of its first character in an enclosing file.
RequireExpr parse_require(std::string_view text,
                          const std::vector<std::string>& declared_args,
                          std::size_t line = 1, std::size_t col = 1);

// Canonical text; parse_require(render_require(e)) == e.
std::string render_require(const RequireExpr& e);

// Free identifiers, in first-occurrence order.
std::vector<std::string> free_identifiers(const RequireExpr& e);

}  // namespace ancheck
