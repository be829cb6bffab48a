#include "ancheck/require.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ancheck/literal.hpp"
#include "expr_parser.hpp"
#include "term.hpp"

namespace ancheck {

namespace detail {

namespace {

constexpr std::string_view kReserved[] = {
    "or",   "and",  "not",   "true", "false", "none",   "True",
    "False", "None", "nan",  "inf",  "len",   "type_of",
};

std::optional<BinaryOp> comparison_op(const Token& t) {
  if (t.kind != Tok::Punct) return std::nullopt;
  if (t.text == "==") return BinaryOp::Eq;
  if (t.text == "!=") return BinaryOp::Ne;
  if (t.text == "<") return BinaryOp::Lt;
  if (t.text == "<=") return BinaryOp::Le;
  if (t.text == ">") return BinaryOp::Gt;
  if (t.text == ">=") return BinaryOp::Ge;
  return std::nullopt;
}

Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
  return Expr(expr::Binary{op, std::move(lhs), std::move(rhs)});
}

class ExprParser {
 public:
  ExprParser(TokenStream& ts, std::vector<IdentUse>& idents) : ts_(ts), idents_(idents) {}

  Expr parse_or() {
    Expr lhs = parse_and();
    while (ts_.peek().is_ident("or")) {
      ts_.next();
      lhs = binary(BinaryOp::Or, std::move(lhs), parse_and());
    }
    return lhs;
  }

 private:
  Expr parse_and() {
    Expr lhs = parse_not();
    while (ts_.peek().is_ident("and")) {
      ts_.next();
      lhs = binary(BinaryOp::And, std::move(lhs), parse_not());
    }
    return lhs;
  }

  Expr parse_not() {
    if (ts_.peek().is_ident("not")) {
      ts_.next();
      return Expr(expr::Unary{UnaryOp::Not, parse_not()});
    }
    return parse_comparison();
  }

  Expr parse_comparison() {
    Expr lhs = parse_additive();
    reject_python_operators();
    if (auto op = comparison_op(ts_.peek())) {
      ts_.next();
      Expr rhs = parse_additive();
      reject_python_operators();
      if (comparison_op(ts_.peek())) {
        TokenStream::fail(ts_.peek(), "chained comparisons are not supported");
      }
      return binary(*op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  void reject_python_operators() {
    const Token& t = ts_.peek();
    if (t.is_ident("is") || t.is_ident("in")) {
      TokenStream::fail(t, "operator '" + t.text +
                               "' is not supported; compare type_of(x) with == or !=");
    }
  }

  Expr parse_additive() {
    Expr lhs = parse_multiplicative();
    for (;;) {
      if (ts_.accept_punct("+")) {
        lhs = binary(BinaryOp::Add, std::move(lhs), parse_multiplicative());
      } else if (ts_.accept_punct("-")) {
        lhs = binary(BinaryOp::Sub, std::move(lhs), parse_multiplicative());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_multiplicative() {
    Expr lhs = parse_unary();
    for (;;) {
      if (ts_.accept_punct("*")) {
        lhs = binary(BinaryOp::Mul, std::move(lhs), parse_unary());
      } else if (ts_.accept_punct("/")) {
        lhs = binary(BinaryOp::Div, std::move(lhs), parse_unary());
      } else if (ts_.accept_punct("%")) {
        lhs = binary(BinaryOp::Mod, std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (ts_.peek().is_punct("-")) {
      const Tok after = ts_.peek(1).kind;
      if (after == Tok::Int || after == Tok::Float || ts_.peek(1).is_ident("inf")) {
        // A minus directly before a number is part of the literal.
        auto term = parse_term(ts_);
        return parse_postfix(Expr(expr::Literal{term.scalar}));
      }
      ts_.next();
      return Expr(expr::Unary{UnaryOp::Neg, parse_unary()});
    }
    return parse_postfix(parse_primary());
  }

  Expr parse_postfix(Expr e) {
    for (;;) {
      if (ts_.accept_punct("[")) {
        Expr index = parse_or();
        ts_.expect_punct("]");
        e = Expr(expr::Index{std::move(e), std::move(index)});
      } else if (ts_.peek().is_punct(".")) {
        TokenStream::fail(ts_.peek(),
                          "attribute access is not supported; preconditions may only "
                          "reference the function's arguments");
      } else if (ts_.peek().is_punct("(")) {
        TokenStream::fail(ts_.peek(), "only len(...) and type_of(...) may be called");
      } else {
        return e;
      }
    }
  }

  Expr parse_primary() {
    const Token& t = ts_.peek();
    switch (t.kind) {
      case Tok::Int:
      case Tok::Float:
      case Tok::String: {
        auto term = parse_term(ts_);
        return Expr(expr::Literal{term.scalar});
      }
      case Tok::Ident:
        return parse_word();
      case Tok::Punct:
        if (t.text == "(") {
          ts_.next();
          Expr inner = parse_or();
          ts_.expect_punct(")");
          return inner;
        }
        break;
      default:
        break;
    }
    TokenStream::fail(t, "expected an expression");
  }

  Expr parse_word() {
    const Token t = ts_.next();
    if (t.text == "len" || t.text == "type_of") {
      ts_.expect_punct("(");
      Expr arg = parse_or();
      ts_.expect_punct(")");
      return Expr(expr::Call{t.text == "len" ? Builtin::Len : Builtin::TypeOf, std::move(arg)});
    }
    if (t.text == "type" && ts_.peek().is_punct("(")) {
      TokenStream::fail(t, "type(x) is not supported; write type_of(x) == \"list\"");
    }
    if (t.text == "true" || t.text == "True") return Expr(expr::Literal{Value::boolean(true)});
    if (t.text == "false" || t.text == "False") return Expr(expr::Literal{Value::boolean(false)});
    if (t.text == "none" || t.text == "None") return Expr(expr::Literal{Value::none()});
    if (t.text == "nan") {
      return Expr(expr::Literal{Value::real(std::numeric_limits<double>::quiet_NaN())});
    }
    if (t.text == "inf") {
      return Expr(expr::Literal{Value::real(std::numeric_limits<double>::infinity())});
    }
    if (is_reserved_word(t.text)) TokenStream::fail(t, "unexpected keyword");
    if (ts_.peek().is_punct("(")) {
      TokenStream::fail(t, "only len(...) and type_of(...) may be called");
    }
    idents_.push_back({t.text, t.line, t.col});
    return Expr(expr::Ident{t.text});
  }

  TokenStream& ts_;
  std::vector<IdentUse>& idents_;
};

}  // namespace

RequireExpr parse_expression(TokenStream& ts, std::vector<IdentUse>& idents) {
  return ExprParser(ts, idents).parse_or();
}

bool is_reserved_word(std::string_view word) {
  return std::find(std::begin(kReserved), std::end(kReserved), word) != std::end(kReserved);
}

}  // namespace detail

namespace {

// Binding strength; higher binds tighter.
int precedence(const Expr& e) {
  if (const auto* b = std::get_if<expr::Binary>(&e.node)) {
    switch (b->op) {
      case BinaryOp::Or:
        return 1;
      case BinaryOp::And:
        return 2;
      case BinaryOp::Add:
      case BinaryOp::Sub:
        return 5;
      case BinaryOp::Mul:
      case BinaryOp::Div:
      case BinaryOp::Mod:
        return 6;
      default:
        return 4;
    }
  }
  if (const auto* u = std::get_if<expr::Unary>(&e.node)) {
    return u->op == UnaryOp::Not ? 3 : 7;
  }
  return 8;
}

bool is_numeric_literal(const Expr& e) {
  const auto* lit = std::get_if<expr::Literal>(&e.node);
  return lit && lit->value.is_numeric();
}

std::string render(const Expr& e, int min_prec);

std::string render_node(const Expr& e) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, expr::Literal>) {
          return render_literal(n.value);
        } else if constexpr (std::is_same_v<T, expr::Ident>) {
          return n.name;
        } else if constexpr (std::is_same_v<T, expr::Unary>) {
          if (n.op == UnaryOp::Not) return "not " + render(*n.operand, 3);
          if (is_numeric_literal(*n.operand)) return "-(" + render(*n.operand, 1) + ")";
          return "-" + render(*n.operand, 7);
        } else if constexpr (std::is_same_v<T, expr::Binary>) {
          int lhs_prec = 0;
          int rhs_prec = 0;
          switch (n.op) {
            case BinaryOp::Or:
              lhs_prec = 1, rhs_prec = 2;
              break;
            case BinaryOp::And:
              lhs_prec = 2, rhs_prec = 3;
              break;
            case BinaryOp::Add:
            case BinaryOp::Sub:
              lhs_prec = 5, rhs_prec = 6;
              break;
            case BinaryOp::Mul:
            case BinaryOp::Div:
            case BinaryOp::Mod:
              lhs_prec = 6, rhs_prec = 7;
              break;
            default:
              lhs_prec = 5, rhs_prec = 5;
          }
          return render(*n.lhs, lhs_prec) + " " + std::string(op_symbol(n.op)) + " " +
                 render(*n.rhs, rhs_prec);
        } else if constexpr (std::is_same_v<T, expr::Call>) {
          return std::string(builtin_name(n.fn)) + "(" + render(*n.arg, 1) + ")";
        } else {
          return render(*n.target, 8) + "[" + render(*n.index, 1) + "]";
        }
      },
      e.node);
}

std::string render(const Expr& e, int min_prec) {
  std::string text = render_node(e);
  if (precedence(e) < min_prec) return "(" + text + ")";
  return text;
}

void collect_idents(const Expr& e, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, expr::Ident>) {
          if (std::find(out.begin(), out.end(), n.name) == out.end()) out.push_back(n.name);
        } else if constexpr (std::is_same_v<T, expr::Unary>) {
          collect_idents(*n.operand, out);
        } else if constexpr (std::is_same_v<T, expr::Binary>) {
          collect_idents(*n.lhs, out);
          collect_idents(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, expr::Call>) {
          collect_idents(*n.arg, out);
        } else if constexpr (std::is_same_v<T, expr::Index>) {
          collect_idents(*n.target, out);
          collect_idents(*n.index, out);
        }
      },
      e.node);
}

}  // namespace

std::string_view op_symbol(BinaryOp op) {
  static constexpr std::string_view kSymbols[] = {
      "or", "and", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "%",
  };
  return kSymbols[static_cast<std::size_t>(op)];
}

std::string_view builtin_name(Builtin fn) { return fn == Builtin::Len ? "len" : "type_of"; }

RequireExpr parse_require(std::string_view text, const std::vector<std::string>& declared_args,
                          std::size_t line, std::size_t col) {
  detail::TokenStream ts(detail::tokenize(text, line, col));
  std::vector<detail::IdentUse> idents;
  RequireExpr e = detail::parse_expression(ts, idents);
  if (!ts.at_end()) detail::TokenStream::fail(ts.peek(), "unexpected trailing input");
  for (const auto& use : idents) {
    if (std::find(declared_args.begin(), declared_args.end(), use.name) == declared_args.end()) {
      throw UnknownIdentifier(use.line, use.col, use.name);
    }
  }
  return e;
}

std::string render_require(const RequireExpr& e) { return render(e, 0); }

std::vector<std::string> free_identifiers(const RequireExpr& e) {
  std::vector<std::string> out;
  collect_idents(e, out);
  return out;
}

}  // namespace ancheck
