#include "ancheck/literal.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "lexer.hpp"
#include "term.hpp"

namespace ancheck {

namespace detail {

namespace {

std::optional<Value> keyword_scalar(std::string_view word) {
  if (word == "none" || word == "None") return Value::none();
  if (word == "true" || word == "True") return Value::boolean(true);
  if (word == "false" || word == "False") return Value::boolean(false);
  if (word == "nan") return Value::real(std::numeric_limits<double>::quiet_NaN());
  if (word == "inf") return Value::real(std::numeric_limits<double>::infinity());
  return std::nullopt;
}

Value parse_number(const Token& t, bool negative) {
  if (t.kind == Tok::Float) {
    double d = 0;
    const std::string text = (negative ? "-" : "") + t.text;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (ec == std::errc::result_out_of_range) {
      d = negative ? -std::numeric_limits<double>::infinity()
                   : std::numeric_limits<double>::infinity();
    } else if (ec != std::errc() || ptr != text.data() + text.size()) {
      TokenStream::fail(t, "malformed float");
    }
    return Value::real(d);
  }
  std::uint64_t magnitude = 0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), magnitude);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
    TokenStream::fail(t, "integer literal out of range");
  }
  constexpr auto kLimit = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
  if (negative) {
    if (magnitude > kLimit + 1) TokenStream::fail(t, "integer literal out of range");
    return Value::integer(static_cast<std::int64_t>(0 - magnitude));
  }
  if (magnitude > kLimit) TokenStream::fail(t, "integer literal out of range");
  return Value::integer(static_cast<std::int64_t>(magnitude));
}

void parse_args(TokenStream& ts, Term& out, std::string_view close) {
  while (!ts.peek().is_punct(close)) {
    if (ts.peek().kind == Tok::Ident && ts.peek(1).is_punct("=")) {
      std::string key = ts.next().text;
      ts.next();
      out.kwargs.emplace_back(std::move(key), parse_term(ts));
    } else {
      if (!out.kwargs.empty()) {
        TokenStream::fail(ts.peek(), "positional argument after keyword argument");
      }
      out.items.push_back(parse_term(ts));
    }
    if (!ts.accept_punct(",")) break;
  }
  ts.expect_punct(close);
}

}  // namespace

Term parse_term(TokenStream& ts) {
  const Token& first = ts.peek();
  Term t;
  t.line = first.line;
  t.col = first.col;

  if (first.is_punct("-")) {
    ts.next();
    const Token& num = ts.peek();
    if (num.kind == Tok::Int || num.kind == Tok::Float) {
      t.scalar = parse_number(ts.next(), true);
      return t;
    }
    if (num.is_ident("inf")) {
      ts.next();
      t.scalar = Value::real(-std::numeric_limits<double>::infinity());
      return t;
    }
    TokenStream::fail(num, "expected number after '-'");
  }
  if (first.kind == Tok::Int || first.kind == Tok::Float) {
    t.scalar = parse_number(ts.next(), false);
    return t;
  }
  if (first.kind == Tok::String) {
    t.scalar = Value::str(ts.next().text);
    return t;
  }
  if (first.is_punct("[")) {
    ts.next();
    t.kind = Term::Kind::List;
    while (!ts.peek().is_punct("]")) {
      t.items.push_back(parse_term(ts));
      if (!ts.accept_punct(",")) break;
    }
    ts.expect_punct("]");
    return t;
  }
  if (first.is_punct("(")) {
    ts.next();
    if (ts.accept_punct(")")) {
      t.kind = Term::Kind::Tuple;
      return t;
    }
    Term inner = parse_term(ts);
    if (ts.accept_punct(")")) return inner;  // grouping
    t.kind = Term::Kind::Tuple;
    t.items.push_back(std::move(inner));
    while (ts.accept_punct(",")) {
      if (ts.peek().is_punct(")")) break;
      t.items.push_back(parse_term(ts));
    }
    ts.expect_punct(")");
    return t;
  }
  if (first.is_punct("{")) {
    ts.next();
    t.kind = Term::Kind::Dict;
    while (!ts.peek().is_punct("}")) {
      t.items.push_back(parse_term(ts));
      ts.expect_punct(":");
      t.items.push_back(parse_term(ts));
      if (!ts.accept_punct(",")) break;
    }
    ts.expect_punct("}");
    return t;
  }
  if (first.kind == Tok::Ident) {
    ts.next();
    if (first.text == "gen" && ts.peek().kind == Tok::Ident) {
      t.kind = Term::Kind::GenCall;
      t.name = ts.next().text;
      ts.expect_punct("(");
      parse_args(ts, t, ")");
      if (!t.kwargs.empty()) {
        TokenStream::fail(first, "generator calls take positional arguments only");
      }
      return t;
    }
    if (ts.peek().is_punct("(")) {
      ts.next();
      t.kind = Term::Kind::Call;
      t.name = first.text;
      parse_args(ts, t, ")");
      return t;
    }
    if (auto kw = keyword_scalar(first.text)) {
      t.scalar = *kw;
      return t;
    }
    t.kind = Term::Kind::Name;
    t.name = first.text;
    return t;
  }
  TokenStream::fail(first, "expected a value or constraint");
}

std::optional<Value> term_to_value(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Scalar:
      return t.scalar;
    case Term::Kind::Name:
    case Term::Kind::GenCall:
      return std::nullopt;
    case Term::Kind::List:
    case Term::Kind::Tuple: {
      std::vector<Value> items;
      for (const auto& item : t.items) {
        auto v = term_to_value(item);
        if (!v) return std::nullopt;
        items.push_back(std::move(*v));
      }
      return t.kind == Term::Kind::List ? Value::list(std::move(items))
                                        : Value::tuple(std::move(items));
    }
    case Term::Kind::Dict: {
      std::vector<std::pair<Value, Value>> entries;
      for (std::size_t i = 0; i + 1 < t.items.size(); i += 2) {
        auto k = term_to_value(t.items[i]);
        auto v = term_to_value(t.items[i + 1]);
        if (!k || !v) return std::nullopt;
        entries.emplace_back(std::move(*k), std::move(*v));
      }
      Value out = Value::dict(std::move(entries));
      if (!well_formed(out)) {
        throw SyntaxError(t.line, t.col, "dict literal has duplicate or unhashable keys");
      }
      return out;
    }
    case Term::Kind::Call:
      break;
  }
  if (!t.kwargs.empty()) return std::nullopt;
  if (t.name == "handle" && t.items.size() == 2) {
    auto id = term_to_value(t.items[0]);
    auto gen = term_to_value(t.items[1]);
    if (!id || !gen || id->kind() != Value::Kind::Int || id->as_int() < 0 ||
        gen->kind() != Value::Kind::Str) {
      throw SyntaxError(t.line, t.col, "handle literal is handle(<id>, \"<gen>\")");
    }
    return Value::handle(static_cast<std::uint64_t>(id->as_int()), gen->as_str());
  }
  if (t.name == "ndarray" && t.items.size() == 3) {
    auto dtype = term_to_value(t.items[0]);
    auto shape = term_to_value(t.items[1]);
    auto data = term_to_value(t.items[2]);
    std::optional<DType> tag;
    if (dtype && dtype->kind() == Value::Kind::Str) tag = dtype_from_name(dtype->as_str());
    if (!tag || !shape || shape->kind() != Value::Kind::Tuple || !data ||
        data->kind() != Value::Kind::List) {
      throw SyntaxError(t.line, t.col,
                        "ndarray literal is ndarray(\"<dtype>\", (<shape>), [<data>])");
    }
    std::vector<std::size_t> dims;
    for (const auto& side : shape->as_tuple().items) {
      if (side.kind() != Value::Kind::Int || side.as_int() < 0) {
        throw SyntaxError(t.line, t.col, "ndarray shape must hold non-negative ints");
      }
      dims.push_back(static_cast<std::size_t>(side.as_int()));
    }
    Value out = Value::ndarray(*tag, std::move(dims), data->as_list().items);
    if (!well_formed(out)) {
      throw SyntaxError(t.line, t.col, "ndarray data does not match its shape or dtype");
    }
    return out;
  }
  return std::nullopt;
}

Value require_value(const Term& t, const std::string& what) {
  auto v = term_to_value(t);
  if (!v) throw SyntaxError(t.line, t.col, "expected " + what);
  return *v;
}

}  // namespace detail

std::string format_double(double d) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  std::string out(buf, ptr);
  if (out.find_first_of(".en") == std::string::npos) out += ".0";
  return out;
}

std::string render_literal(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::None:
      return "none";
    case Value::Kind::Bool:
      return v.as_bool() ? "true" : "false";
    case Value::Kind::Int:
      return std::to_string(v.as_int());
    case Value::Kind::Float: {
      const double d = v.as_float();
      if (std::isnan(d)) return "nan";
      if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
      return format_double(d);
    }
    case Value::Kind::Str:
      return detail::quote_string(v.as_str());
    case Value::Kind::List: {
      std::string out = "[";
      const auto& items = v.as_list().items;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += render_literal(items[i]);
      }
      return out + "]";
    }
    case Value::Kind::Tuple: {
      std::string out = "(";
      const auto& items = v.as_tuple().items;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += render_literal(items[i]);
      }
      if (items.size() == 1) out += ",";
      return out + ")";
    }
    case Value::Kind::Dict: {
      std::string out = "{";
      const auto& entries = v.as_dict().entries;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) out += ", ";
        out += render_literal(entries[i].first) + ": " + render_literal(entries[i].second);
      }
      return out + "}";
    }
    case Value::Kind::NdArray: {
      const auto& nd = v.as_ndarray();
      std::vector<Value> shape;
      for (auto side : nd.shape) shape.push_back(Value::integer(static_cast<std::int64_t>(side)));
      return "ndarray(" + detail::quote_string(dtype_name(nd.dtype)) + ", " +
             render_literal(Value::tuple(std::move(shape))) + ", " +
             render_literal(Value::list(nd.data)) + ")";
    }
    case Value::Kind::Handle:
      return "handle(" + std::to_string(v.as_handle().id) + ", " +
             detail::quote_string(v.as_handle().gen) + ")";
  }
  return "none";
}

Value parse_literal(std::string_view text) {
  detail::TokenStream ts(detail::tokenize(text));
  auto term = detail::parse_term(ts);
  if (!ts.at_end()) detail::TokenStream::fail(ts.peek(), "unexpected trailing input");
  return detail::require_value(term, "a literal value");
}

}  // namespace ancheck
