#include "ancheck/eval.hpp"

#include <cmath>
#include <limits>

#include "lexer.hpp"

namespace ancheck {

namespace {

using K = Value::Kind;

// Exact when long double has a 64-bit mantissa (x86-64). Elsewhere ints above
// 2^53 may round.
int compare_int_double(std::int64_t i, double d) {
  const long double li = static_cast<long double>(i);
  const long double ld = static_cast<long double>(d);
  if (li < ld) return -1;
  if (li > ld) return 1;
  return 0;
}

double to_double(const Value& v) {
  return v.kind() == K::Int ? static_cast<double>(v.as_int()) : v.as_float();
}

bool numeric_eq(const Value& a, const Value& b) {
  if (a.kind() == K::Int && b.kind() == K::Int) return a.as_int() == b.as_int();
  if (a.kind() == K::Float && b.kind() == K::Float) return a.as_float() == b.as_float();
  const auto i = a.kind() == K::Int ? a.as_int() : b.as_int();
  const auto d = a.kind() == K::Float ? a.as_float() : b.as_float();
  if (std::isnan(d)) return false;
  return compare_int_double(i, d) == 0;
}

bool sequence_eq(const std::vector<Value>& a, const std::vector<Value>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!loose_eq(a[i], b[i])) return false;
  }
  return true;
}

const Value* dict_find(const DictValue& d, const Value& key) {
  for (const auto& [k, v] : d.entries) {
    if (loose_eq(k, key)) return &v;
  }
  return nullptr;
}

struct Failure {
  EvalError error;
};

class Evaluator {
 public:
  explicit Evaluator(const Binding& b) : binding_(b) {}

  Value run(const Expr& e) {
    return std::visit([&](const auto& n) { return visit(n, e); }, e.node);
  }

 private:
  [[noreturn]] static void fail(EvalErrorKind kind, const Expr& at, std::string detail) {
    throw Failure{EvalError{kind, render_require(at), std::move(detail)}};
  }

  static void reject_handle(const Value& v, const Expr& at) {
    if (v.kind() == K::Handle) fail(EvalErrorKind::TypeMismatch, at, "handles support only type_of and == none");
  }

  bool truth(const Expr& e) {
    Value v = run(e);
    if (v.kind() != K::Bool) {
      fail(EvalErrorKind::TypeMismatch, e, std::string("expected bool, got ") +
                                               std::string(kind_name(v.kind())));
    }
    return v.as_bool();
  }

  Value visit(const expr::Literal& n, const Expr&) { return n.value; }

  Value visit(const expr::Ident& n, const Expr& at) {
    for (const auto& [name, v] : binding_) {
      if (name == n.name) return v;
    }
    fail(EvalErrorKind::UnboundIdentifier, at, "no argument named '" + n.name + "'");
  }

  Value visit(const expr::Unary& n, const Expr& at) {
    if (n.op == UnaryOp::Not) return Value::boolean(!truth(*n.operand));
    Value v = run(*n.operand);
    if (v.kind() == K::Int) {
      if (v.as_int() == std::numeric_limits<std::int64_t>::min()) {
        fail(EvalErrorKind::Overflow, at, "integer overflow");
      }
      return Value::integer(-v.as_int());
    }
    if (v.kind() == K::Float) return Value::real(-v.as_float());
    fail(EvalErrorKind::TypeMismatch, at, "cannot negate " + std::string(kind_name(v.kind())));
  }

  Value visit(const expr::Binary& n, const Expr& at) {
    switch (n.op) {
      case BinaryOp::Or:
        return Value::boolean(truth(*n.lhs) || truth(*n.rhs));
      case BinaryOp::And:
        return Value::boolean(truth(*n.lhs) && truth(*n.rhs));
      default:
        break;
    }
    Value a = run(*n.lhs);
    Value b = run(*n.rhs);
    switch (n.op) {
      case BinaryOp::Eq:
      case BinaryOp::Ne:
        return Value::boolean(equals(a, b, at) == (n.op == BinaryOp::Eq));
      case BinaryOp::Lt:
        return Value::boolean(order(a, b, at) == Order::Less);
      case BinaryOp::Le: {
        const auto o = order(a, b, at);
        return Value::boolean(o == Order::Less || o == Order::Equal);
      }
      case BinaryOp::Gt:
        return Value::boolean(order(a, b, at) == Order::Greater);
      case BinaryOp::Ge: {
        const auto o = order(a, b, at);
        return Value::boolean(o == Order::Greater || o == Order::Equal);
      }
      default:
        return arithmetic(n.op, a, b, at);
    }
  }

  Value visit(const expr::Call& n, const Expr& at) {
    Value v = run(*n.arg);
    if (n.fn == Builtin::TypeOf) return Value::str(std::string(kind_name(v.kind())));
    switch (v.kind()) {
      case K::Str:
        return Value::integer(static_cast<std::int64_t>(detail::utf8_length(v.as_str())));
      case K::List:
      case K::Tuple:
        return Value::integer(static_cast<std::int64_t>(v.sequence_items().size()));
      case K::Dict:
        return Value::integer(static_cast<std::int64_t>(v.as_dict().entries.size()));
      case K::NdArray:
        if (!v.as_ndarray().shape.empty()) {
          return Value::integer(static_cast<std::int64_t>(v.as_ndarray().shape[0]));
        }
        break;
      default:
        break;
    }
    fail(EvalErrorKind::TypeMismatch, at, "len() of " + std::string(kind_name(v.kind())));
  }

  Value visit(const expr::Index& n, const Expr& at) {
    Value target = run(*n.target);
    Value index = run(*n.index);
    if (target.kind() == K::Dict) {
      reject_handle(index, at);
      if (const Value* found = dict_find(target.as_dict(), index)) return *found;
      fail(EvalErrorKind::KeyMissing, at, "key not present");
    }
    if (index.kind() != K::Int) {
      fail(EvalErrorKind::TypeMismatch, at, "index must be int, got " +
                                                std::string(kind_name(index.kind())));
    }
    const std::int64_t i = index.as_int();
    auto resolve = [&](std::size_t size) -> std::size_t {
      const auto n_size = static_cast<std::int64_t>(size);
      const std::int64_t j = i < 0 ? i + n_size : i;
      if (j < 0 || j >= n_size) fail(EvalErrorKind::IndexOutOfRange, at, "index out of range");
      return static_cast<std::size_t>(j);
    };
    switch (target.kind()) {
      case K::List:
      case K::Tuple: {
        const auto& items = target.sequence_items();
        return items[resolve(items.size())];
      }
      case K::Str: {
        const std::string& s = target.as_str();
        const std::size_t want = resolve(detail::utf8_length(s));
        // Walk code points; continuation bytes are 10xxxxxx.
        std::size_t cp = 0;
        for (std::size_t pos = 0; pos < s.size();) {
          std::size_t len = 1;
          while (pos + len < s.size() &&
                 (static_cast<unsigned char>(s[pos + len]) & 0xC0) == 0x80) {
            ++len;
          }
          if (cp == want) return Value::str(s.substr(pos, len));
          ++cp;
          pos += len;
        }
        break;
      }
      case K::NdArray: {
        const auto& nd = target.as_ndarray();
        if (nd.shape.empty()) break;
        const std::size_t row = resolve(nd.shape[0]);
        if (nd.shape.size() == 1) return nd.data[row];
        std::vector<std::size_t> sub(nd.shape.begin() + 1, nd.shape.end());
        std::size_t stride = 1;
        for (auto side : sub) stride *= side;
        std::vector<Value> data(nd.data.begin() + static_cast<std::ptrdiff_t>(row * stride),
                                nd.data.begin() + static_cast<std::ptrdiff_t>((row + 1) * stride));
        return Value::ndarray(nd.dtype, std::move(sub), std::move(data));
      }
      default:
        break;
    }
    fail(EvalErrorKind::TypeMismatch, at, "cannot index " + std::string(kind_name(target.kind())));
  }

  bool equals(const Value& a, const Value& b, const Expr& at) {
    if (a.kind() == K::Handle || b.kind() == K::Handle) {
      if (a.is_none() || b.is_none()) return false;
      fail(EvalErrorKind::TypeMismatch, at, "handles support only type_of and == none");
    }
    if (a.kind() == K::NdArray || b.kind() == K::NdArray) {
      fail(EvalErrorKind::TypeMismatch, at, "ndarray equality is elementwise and not a bool");
    }
    return loose_eq(a, b);
  }

  enum class Order { Less, Equal, Greater, Unordered };

  Order order(const Value& a, const Value& b, const Expr& at) {
    if (a.is_numeric() && b.is_numeric()) {
      int c = 0;
      if (a.kind() == K::Int && b.kind() == K::Int) {
        c = a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
      } else if (a.kind() == K::Float && b.kind() == K::Float) {
        const double x = a.as_float();
        const double y = b.as_float();
        if (std::isnan(x) || std::isnan(y)) return Order::Unordered;
        c = x < y ? -1 : (x > y ? 1 : 0);
      } else if (a.kind() == K::Int) {
        if (std::isnan(b.as_float())) return Order::Unordered;
        c = compare_int_double(a.as_int(), b.as_float());
      } else {
        if (std::isnan(a.as_float())) return Order::Unordered;
        c = -compare_int_double(b.as_int(), a.as_float());
      }
      return c < 0 ? Order::Less : (c > 0 ? Order::Greater : Order::Equal);
    }
    if (a.kind() == K::Str && b.kind() == K::Str) {
      const int c = a.as_str().compare(b.as_str());
      return c < 0 ? Order::Less : (c > 0 ? Order::Greater : Order::Equal);
    }
    if ((a.kind() == K::List && b.kind() == K::List) ||
        (a.kind() == K::Tuple && b.kind() == K::Tuple)) {
      const auto& x = a.sequence_items();
      const auto& y = b.sequence_items();
      for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (equals(x[i], y[i], at)) continue;
        return order(x[i], y[i], at);
      }
      if (x.size() == y.size()) return Order::Equal;
      return x.size() < y.size() ? Order::Less : Order::Greater;
    }
    fail(EvalErrorKind::TypeMismatch, at, "cannot order " + std::string(kind_name(a.kind())) +
                                              " and " + std::string(kind_name(b.kind())));
  }

  Value arithmetic(BinaryOp op, const Value& a, const Value& b, const Expr& at) {
    if (op == BinaryOp::Add && a.kind() == b.kind()) {
      if (a.kind() == K::Str) return Value::str(a.as_str() + b.as_str());
      if (a.kind() == K::List || a.kind() == K::Tuple) {
        std::vector<Value> items = a.sequence_items();
        items.insert(items.end(), b.sequence_items().begin(), b.sequence_items().end());
        return a.kind() == K::List ? Value::list(std::move(items)) : Value::tuple(std::move(items));
      }
    }
    if (!a.is_numeric() || !b.is_numeric()) {
      fail(EvalErrorKind::TypeMismatch, at, "unsupported operands " +
                                                std::string(kind_name(a.kind())) + " " +
                                                std::string(op_symbol(op)) + " " +
                                                std::string(kind_name(b.kind())));
    }
    if (op == BinaryOp::Div) {
      const double y = to_double(b);
      if (y == 0) fail(EvalErrorKind::DivisionByZero, at, "division by zero");
      return Value::real(to_double(a) / y);
    }
    if (a.kind() == K::Int && b.kind() == K::Int) {
      const std::int64_t x = a.as_int();
      const std::int64_t y = b.as_int();
      std::int64_t r = 0;
      switch (op) {
        case BinaryOp::Add:
          if (__builtin_add_overflow(x, y, &r)) fail(EvalErrorKind::Overflow, at, "integer overflow");
          return Value::integer(r);
        case BinaryOp::Sub:
          if (__builtin_sub_overflow(x, y, &r)) fail(EvalErrorKind::Overflow, at, "integer overflow");
          return Value::integer(r);
        case BinaryOp::Mul:
          if (__builtin_mul_overflow(x, y, &r)) fail(EvalErrorKind::Overflow, at, "integer overflow");
          return Value::integer(r);
        default: {
          if (y == 0) fail(EvalErrorKind::DivisionByZero, at, "modulo by zero");
          if (y == -1) return Value::integer(0);
          r = x % y;
          if (r != 0 && ((r < 0) != (y < 0))) r += y;
          return Value::integer(r);
        }
      }
    }
    const double x = to_double(a);
    const double y = to_double(b);
    switch (op) {
      case BinaryOp::Add:
        return Value::real(x + y);
      case BinaryOp::Sub:
        return Value::real(x - y);
      case BinaryOp::Mul:
        return Value::real(x * y);
      default: {
        if (y == 0) fail(EvalErrorKind::DivisionByZero, at, "modulo by zero");
        double r = std::fmod(x, y);
        if (r != 0 && ((r < 0) != (y < 0))) r += y;
        if (r == 0) r = std::copysign(0.0, y);
        return Value::real(r);
      }
    }
  }

  const Binding& binding_;
};

}  // namespace

std::string_view eval_error_kind_name(EvalErrorKind k) {
  switch (k) {
    case EvalErrorKind::TypeMismatch:
      return "type-mismatch";
    case EvalErrorKind::DivisionByZero:
      return "division-by-zero";
    case EvalErrorKind::IndexOutOfRange:
      return "index-out-of-range";
    case EvalErrorKind::KeyMissing:
      return "key-missing";
    case EvalErrorKind::Overflow:
      return "overflow";
    case EvalErrorKind::UnboundIdentifier:
      return "unbound-identifier";
  }
  return "unknown";
}

bool loose_eq(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) return numeric_eq(a, b);
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case K::None:
      return true;
    case K::Bool:
      return a.as_bool() == b.as_bool();
    case K::Str:
      return a.as_str() == b.as_str();
    case K::List:
    case K::Tuple:
      return sequence_eq(a.sequence_items(), b.sequence_items());
    case K::Dict: {
      const auto& x = a.as_dict();
      const auto& y = b.as_dict();
      if (x.entries.size() != y.entries.size()) return false;
      for (const auto& [k, v] : x.entries) {
        const Value* other = dict_find(y, k);
        if (!other || !loose_eq(v, *other)) return false;
      }
      return true;
    }
    case K::NdArray: {
      const auto& x = a.as_ndarray();
      const auto& y = b.as_ndarray();
      return x.shape == y.shape && sequence_eq(x.data, y.data);
    }
    case K::Handle:
      return a.as_handle().id == b.as_handle().id;
    default:
      return false;
  }
}

ValueResult eval_value(const RequireExpr& e, const Binding& b) {
  try {
    return Evaluator(b).run(e);
  } catch (const Failure& f) {
    return f.error;
  }
}

EvalResult eval(const RequireExpr& e, const Binding& b) {
  ValueResult r = eval_value(e, b);
  if (auto* err = std::get_if<EvalError>(&r)) return *err;
  const Value& v = std::get<Value>(r);
  if (v.kind() != K::Bool) {
    return EvalError{EvalErrorKind::TypeMismatch, render_require(e),
                     "precondition evaluated to " + std::string(kind_name(v.kind()))};
  }
  return v.as_bool();
}

}  // namespace ancheck
