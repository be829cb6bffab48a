#include "ancheck/spec.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include "ancheck/errors.hpp"
#include "ancheck/literal.hpp"
#include "expr_parser.hpp"
#include "lexer.hpp"
#include "term.hpp"

namespace ancheck {

namespace {

using detail::IdentUse;
using detail::Term;
using detail::Tok;
using detail::TokenStream;

struct NameRef {
  std::string name;
  std::size_t line;
  std::size_t col;
};

[[noreturn]] void fail_at(const Term& t, const std::string& message) {
  throw SyntaxError(t.line, t.col, message);
}

struct Param {
  std::string_view name;
  std::string_view alias;
};

// Matches a call's positional and keyword arguments against a parameter list.
std::vector<const Term*> bind_params(const Term& call, std::initializer_list<Param> params) {
  std::vector<Param> list(params);
  std::vector<const Term*> out(list.size(), nullptr);
  if (call.items.size() > list.size()) {
    fail_at(call.items[list.size()], call.name + "() takes at most " +
                                         std::to_string(list.size()) + " positional arguments");
  }
  for (std::size_t i = 0; i < call.items.size(); ++i) out[i] = &call.items[i];
  for (const auto& [key, term] : call.kwargs) {
    auto it = std::find_if(list.begin(), list.end(), [&](const Param& p) {
      return p.name == key || (!p.alias.empty() && p.alias == key);
    });
    if (it == list.end()) fail_at(term, "unknown argument '" + key + "' for " + call.name + "()");
    auto& slot = out[static_cast<std::size_t>(it - list.begin())];
    if (slot) fail_at(term, "argument '" + key + "' given twice");
    slot = &term;
  }
  return out;
}

std::int64_t term_int(const Term& t, const std::string& what) {
  Value v = detail::require_value(t, what);
  if (v.kind() != Value::Kind::Int) fail_at(t, what + " must be an integer");
  return v.as_int();
}

std::size_t term_nat(const Term& t, const std::string& what) {
  const auto i = term_int(t, what);
  if (i < 0) fail_at(t, what + " must be non-negative");
  return static_cast<std::size_t>(i);
}

double term_real(const Term& t, const std::string& what) {
  Value v = detail::require_value(t, what);
  if (v.kind() == Value::Kind::Int) return static_cast<double>(v.as_int());
  if (v.kind() != Value::Kind::Float) fail_at(t, what + " must be a number");
  return v.as_float();
}

bool term_bool(const Term& t, const std::string& what) {
  Value v = detail::require_value(t, what);
  if (v.kind() != Value::Kind::Bool) fail_at(t, what + " must be true or false");
  return v.as_bool();
}

class ConstraintBuilder {
 public:
  explicit ConstraintBuilder(std::vector<NameRef>* refs) : refs_(refs) {}

  LiteralOrGenCall item(const Term& t) {
    if (t.kind == Term::Kind::GenCall) {
      GenCall call{t.name, {}};
      for (const auto& arg : t.items) {
        call.args.push_back(detail::require_value(arg, "a literal generator argument"));
      }
      note_ref(t.name, t);
      return call;
    }
    return detail::require_value(t, "a literal or a gen call");
  }

  Constraint build(const Term& t) {
    if (t.kind == Term::Kind::Name) {
      fail_at(t, "unknown constraint '" + t.name + "' (generators are written objs(" +
                     t.name + "))");
    }
    if (t.kind == Term::Kind::GenCall) return Froms{{item(t)}};
    if (t.kind != Term::Kind::Call) {
      return Froms{{detail::require_value(t, "a constraint")}};
    }
    if (auto literal = detail::term_to_value(t)) return Froms{{*literal}};

    const std::string& name = t.name;
    if (name == "froms") return froms(t);
    if (name == "bools") {
      bind_params(t, {});
      return Bools{};
    }
    if (name == "ints") return ints(t);
    if (name == "floats") return floats(t);
    if (name == "lists") return lists(t);
    if (name == "int_lists") return int_lists(t);
    if (name == "tuples") return Tuples{variadic(t)};
    if (name == "np_shapes") return np_shapes(t);
    if (name == "np_arrays") return np_arrays(t);
    if (name == "dicts") return dicts(t);
    if (name == "anys") return Anys{variadic(t)};
    if (name == "objs") return objs(t);
    fail_at(t, "unknown constraint '" + name + "'");
  }

 private:
  void note_ref(const std::string& name, const Term& at) {
    if (refs_) refs_->push_back({name, at.line, at.col});
  }

  Constraint froms(const Term& t) {
    auto p = bind_params(t, {{"values", ""}});
    if (!p[0] || p[0]->kind != Term::Kind::List) {
      fail_at(t, "froms() takes a list of values");
    }
    Froms out;
    for (const auto& element : p[0]->items) out.items.push_back(item(element));
    return out;
  }

  Constraint ints(const Term& t) {
    auto p = bind_params(t, {{"min", "min_value"}, {"max", "max_value"}});
    Ints out;
    if (p[0]) out.min = term_int(*p[0], "min");
    if (p[1]) out.max = term_int(*p[1], "max");
    return out;
  }

  Constraint floats(const Term& t) {
    auto p = bind_params(t, {{"min", "min_value"},
                             {"max", "max_value"},
                             {"exclude_min", ""},
                             {"exclude_max", ""},
                             {"allow_nan", ""},
                             {"allow_inf", "allow_infinity"},
                             {"width", ""}});
    Floats out;
    if (p[0]) out.min = term_real(*p[0], "min");
    if (p[1]) out.max = term_real(*p[1], "max");
    if (p[2]) out.exclude_min = term_bool(*p[2], "exclude_min");
    if (p[3]) out.exclude_max = term_bool(*p[3], "exclude_max");
    if (p[4]) out.allow_nan = term_bool(*p[4], "allow_nan");
    if (p[5]) out.allow_inf = term_bool(*p[5], "allow_inf");
    if (p[6]) out.width = static_cast<int>(term_int(*p[6], "width"));
    if ((out.exclude_min && !out.min) || (out.exclude_max && !out.max)) {
      fail_at(t, "exclude_min/exclude_max need the corresponding bound");
    }
    return out;
  }

  Constraint lists(const Term& t) {
    auto p = bind_params(t, {{"elem", "elements"}, {"min_len", "min_size"}, {"max_len", "max_size"}});
    if (!p[0]) fail_at(t, "lists() needs an element constraint");
    Lists out{build(*p[0])};
    if (p[1]) out.min_len = term_nat(*p[1], "min_len");
    out.max_len = p[2] ? term_nat(*p[2], "max_len") : out.min_len + 2;
    return out;
  }

  Constraint int_lists(const Term& t) {
    auto p = bind_params(t, {{"min_len", ""}, {"max_len", ""}, {"min", "min_value"}, {"max", "max_value"}});
    IntLists out;
    if (p[0]) out.min_len = term_nat(*p[0], "min_len");
    if (p[1]) out.max_len = term_nat(*p[1], "max_len");
    if (p[2]) out.min = term_int(*p[2], "min");
    if (p[3]) out.max = term_int(*p[3], "max");
    return out;
  }

  std::vector<Constraint> variadic(const Term& t) {
    if (!t.kwargs.empty()) fail_at(t.kwargs.front().second, t.name + "() takes positional arguments only");
    std::vector<Constraint> out;
    for (const auto& element : t.items) out.push_back(build(element));
    return out;
  }

  NpShapes np_shapes_from(const Term& t) {
    auto p = bind_params(t, {{"min_dims", ""}, {"max_dims", ""}, {"min_side", ""}, {"max_side", ""}});
    NpShapes out;
    if (p[0]) out.min_dims = term_nat(*p[0], "min_dims");
    out.max_dims = p[1] ? term_nat(*p[1], "max_dims") : out.min_dims + 2;
    if (p[2]) out.min_side = term_nat(*p[2], "min_side");
    out.max_side = p[3] ? term_nat(*p[3], "max_side") : std::max<std::size_t>(10, out.min_side);
    return out;
  }

  Constraint np_shapes(const Term& t) { return np_shapes_from(t); }

  Constraint np_arrays(const Term& t) {
    auto p = bind_params(t, {{"np_type", "dtype"}, {"shape", ""}});
    NpArrays out;
    if (p[0]) {
      const Term& d = *p[0];
      const Term* name_term = &d;
      if (d.kind == Term::Kind::Call && d.name == "dtype" && d.items.size() == 1 && d.kwargs.empty()) {
        name_term = &d.items[0];
      }
      Value name = detail::require_value(*name_term, "a dtype name");
      std::optional<DType> tag;
      if (name.kind() == Value::Kind::Str) tag = dtype_from_name(name.as_str());
      if (!tag) fail_at(d, "unknown dtype");
      out.dtype = *tag;
    }
    if (p[1]) {
      const Term& s = *p[1];
      if (s.kind == Term::Kind::Call && s.name == "np_shapes") {
        out.shape = np_shapes_from(s);
      } else {
        Value shape = detail::require_value(s, "a shape tuple or np_shapes(...)");
        if (shape.kind() != Value::Kind::Tuple && shape.kind() != Value::Kind::List) {
          fail_at(s, "shape must be a tuple of positive integers");
        }
        std::vector<std::size_t> dims;
        for (const auto& side : shape.sequence_items()) {
          if (side.kind() != Value::Kind::Int || side.as_int() < 0) {
            fail_at(s, "shape must be a tuple of positive integers");
          }
          dims.push_back(static_cast<std::size_t>(side.as_int()));
        }
        out.shape = std::move(dims);
      }
    }
    return out;
  }

  Constraint dicts(const Term& t) {
    auto p = bind_params(t, {{"keys", ""}, {"values", ""}, {"min_size", ""}, {"max_size", ""}});
    if (!p[0] || !p[1]) fail_at(t, "dicts() needs keys and values constraints");
    Dicts out{build(*p[0]), build(*p[1])};
    if (p[2]) out.min_size = term_nat(*p[2], "min_size");
    out.max_size = p[3] ? term_nat(*p[3], "max_size") : out.min_size + 2;
    return out;
  }

  Constraint objs(const Term& t) {
    if (!t.kwargs.empty() || t.items.size() != 1) fail_at(t, "objs() takes one generator name");
    const Term& g = t.items[0];
    std::string name;
    if (g.kind == Term::Kind::Name) {
      name = g.name;
    } else if (g.kind == Term::Kind::Scalar && g.scalar.kind() == Value::Kind::Str) {
      name = g.scalar.as_str();
    } else {
      fail_at(g, "objs() takes one generator name");
    }
    note_ref(name, g);
    return Objs{name};
  }

  std::vector<NameRef>* refs_;
};

void check_valid(const Constraint& c, const Term& at) {
  auto violations = validate(c);
  if (!violations.empty()) fail_at(at, "invalid constraint: " + violations.front());
}

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : ts_(detail::tokenize(text)) {}

  AnnotationSpec run() {
    const auto& head = ts_.peek();
    if (!head.is_ident("subject")) {
      throw SyntaxError(head.line, head.col, "missing subject header");
    }
    ts_.next();
    spec_.subject = ts_.expect(Tok::String, "subject module id string").text;

    while (!ts_.at_end()) {
      const auto t = ts_.next();
      if (t.is_ident("fn") || t.is_ident("gen")) {
        const bool is_gen = t.text == "gen";
        const auto name_tok = ts_.expect(Tok::String, "quoted block name");
        claim_name(name_tok);
        ts_.expect_punct(":");
        auto block = parse_block(is_gen);
        (is_gen ? spec_.generators : spec_.functions).emplace_back(name_tok.text, std::move(block));
      } else if (t.is_ident("module_test")) {
        const auto name_tok = ts_.expect(Tok::String, "quoted module id");
        if (std::find(spec_.module_tests.begin(), spec_.module_tests.end(), name_tok.text) !=
            spec_.module_tests.end()) {
          throw DuplicateError(name_tok.line, name_tok.col, name_tok.text);
        }
        spec_.module_tests.push_back(name_tok.text);
      } else {
        TokenStream::fail(t, "expected 'fn', 'gen' or 'module_test'");
      }
    }

    for (const auto& ref : refs_) {
      if (!spec_.generator(ref.name)) throw ResolutionError(ref.line, ref.col, ref.name);
    }
    return std::move(spec_);
  }

 private:
  void claim_name(const detail::Token& tok) {
    if (tok.text.empty()) throw SyntaxError(tok.line, tok.col, "empty block name");
    if (!names_.insert(tok.text).second) throw DuplicateError(tok.line, tok.col, tok.text);
  }

  FunctionAnnotations parse_block(bool is_gen) {
    FunctionAnnotations out;
    std::vector<IdentUse> idents;
    bool saw_timeout = false;
    while (ts_.peek().kind == Tok::AtWord) {
      const auto at = ts_.next();
      const std::string& word = at.text;
      if (word == "@arg") {
        ts_.expect_punct("(");
        const auto name = ts_.expect(Tok::Ident, "argument name");
        ts_.expect_punct(")");
        ts_.expect_punct(":");
        if (detail::is_reserved_word(name.text)) {
          throw SyntaxError(name.line, name.col, "'" + name.text + "' is a reserved word");
        }
        if (out.arg(name.text)) throw DuplicateError(name.line, name.col, name.text);
        const Term term = detail::parse_term(ts_);
        Constraint c = ConstraintBuilder(&refs_).build(term);
        check_valid(c, term);
        out.args.emplace_back(name.text, std::move(c));
      } else if (word == "@require") {
        ts_.expect_punct("(");
        out.preconditions.push_back(detail::parse_expression(ts_, idents));
        ts_.expect_punct(")");
      } else if (word == "@exclude") {
        out.excluded = true;
      } else if (word == "@generator") {
        if (!is_gen) TokenStream::fail(at, "@generator belongs in a gen block");
      } else if (word == "@timeout") {
        if (saw_timeout) TokenStream::fail(at, "duplicate @timeout");
        saw_timeout = true;
        ts_.expect_punct("(");
        const Term term = detail::parse_term(ts_);
        const double seconds = term_real(term, "timeout");
        if (!(seconds > 0) || !std::isfinite(seconds)) fail_at(term, "timeout must be positive");
        out.timeout_s = seconds;
        ts_.expect_punct(")");
      } else if (word == "@cc_example") {
        if (out.cc_example) TokenStream::fail(at, "duplicate @cc_example");
        ts_.expect_punct("(");
        const Term term = detail::parse_term(ts_);
        if (term.kind != Term::Kind::List) fail_at(term, "@cc_example takes a list of inputs");
        std::vector<LiteralOrGenCall> items;
        ConstraintBuilder builder(&refs_);
        for (const auto& element : term.items) items.push_back(builder.item(element));
        out.cc_example = std::move(items);
        ts_.expect_punct(")");
      } else {
        TokenStream::fail(at, "unknown annotation");
      }
    }
    for (const auto& use : idents) {
      if (!out.arg(use.name)) throw UnknownIdentifier(use.line, use.col, use.name);
    }
    return out;
  }

  TokenStream ts_;
  AnnotationSpec spec_;
  std::vector<NameRef> refs_;
  std::set<std::string> names_;
};

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::string render_bool(bool b) { return b ? "true" : "false"; }

std::string render_item(const LiteralOrGenCall& item) {
  if (const auto* call = std::get_if<GenCall>(&item)) {
    std::string out = "gen " + call->name + "(";
    for (std::size_t i = 0; i < call->args.size(); ++i) {
      if (i) out += ", ";
      out += render_literal(call->args[i]);
    }
    return out + ")";
  }
  return render_literal(std::get<Value>(item));
}

std::string render_items(const std::vector<LiteralOrGenCall>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += render_item(items[i]);
  }
  return out + "]";
}

std::string render_shapes(const NpShapes& s) {
  return "np_shapes(min_dims=" + std::to_string(s.min_dims) +
         ", max_dims=" + std::to_string(s.max_dims) +
         ", min_side=" + std::to_string(s.min_side) +
         ", max_side=" + std::to_string(s.max_side) + ")";
}

std::string join_constraints(const std::vector<Constraint>& cs) {
  std::string out;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (i) out += ", ";
    out += render_constraint(cs[i]);
  }
  return out;
}

void render_block(std::string& out, std::string_view keyword, const std::string& name,
                  const FunctionAnnotations& fa) {
  out += "\n" + std::string(keyword) + " " + detail::quote_string(name) + ":\n";
  for (const auto& [arg, c] : fa.args) {
    out += "  @arg(" + arg + "): " + render_constraint(c) + "\n";
  }
  for (const auto& pre : fa.preconditions) out += "  @require(" + render_require(pre) + ")\n";
  if (fa.excluded) out += "  @exclude\n";
  if (fa.timeout_s) out += "  @timeout(" + format_double(*fa.timeout_s) + ")\n";
  if (fa.cc_example) out += "  @cc_example(" + render_items(*fa.cc_example) + ")\n";
}

const FunctionAnnotations* find_in(
    const std::vector<std::pair<std::string, FunctionAnnotations>>& list, std::string_view name) {
  for (const auto& [n, fa] : list) {
    if (n == name) return &fa;
  }
  return nullptr;
}

}  // namespace

const Constraint* FunctionAnnotations::arg(std::string_view name) const {
  for (const auto& [n, c] : args) {
    if (n == name) return &c;
  }
  return nullptr;
}

std::vector<std::string> FunctionAnnotations::arg_names() const {
  std::vector<std::string> out;
  for (const auto& [n, c] : args) out.push_back(n);
  return out;
}

const FunctionAnnotations* AnnotationSpec::function(std::string_view name) const {
  return find_in(functions, name);
}

const FunctionAnnotations* AnnotationSpec::generator(std::string_view name) const {
  return find_in(generators, name);
}

AnnotationSpec parse_spec(std::string_view text) { return SpecParser(text).run(); }

Constraint parse_constraint(std::string_view text) {
  TokenStream ts(detail::tokenize(text));
  const Term term = detail::parse_term(ts);
  if (!ts.at_end()) TokenStream::fail(ts.peek(), "unexpected trailing input");
  Constraint c = ConstraintBuilder(nullptr).build(term);
  check_valid(c, term);
  return c;
}

std::string render_constraint(const Constraint& c) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Froms>) {
          return "froms(" + render_items(n.items) + ")";
        } else if constexpr (std::is_same_v<T, Bools>) {
          return "bools()";
        } else if constexpr (std::is_same_v<T, Ints>) {
          std::string out = "ints(";
          if (n.min) out += "min=" + std::to_string(*n.min);
          if (n.max) out += std::string(n.min ? ", " : "") + "max=" + std::to_string(*n.max);
          return out + ")";
        } else if constexpr (std::is_same_v<T, Floats>) {
          std::string out = "floats(";
          if (n.min) out += "min=" + format_double(*n.min) + ", ";
          if (n.max) out += "max=" + format_double(*n.max) + ", ";
          out += "exclude_min=" + render_bool(n.exclude_min);
          out += ", exclude_max=" + render_bool(n.exclude_max);
          out += ", allow_nan=" + render_bool(n.allow_nan);
          out += ", allow_inf=" + render_bool(n.allow_inf);
          out += ", width=" + std::to_string(n.width);
          return out + ")";
        } else if constexpr (std::is_same_v<T, Lists>) {
          return "lists(" + render_constraint(*n.elem) + ", min_len=" + std::to_string(n.min_len) +
                 ", max_len=" + std::to_string(n.max_len) + ")";
        } else if constexpr (std::is_same_v<T, IntLists>) {
          std::string out = "int_lists(min_len=" + std::to_string(n.min_len);
          if (n.max_len) out += ", max_len=" + std::to_string(*n.max_len);
          out += ", min=" + std::to_string(n.min);
          if (n.max) out += ", max=" + std::to_string(*n.max);
          return out + ")";
        } else if constexpr (std::is_same_v<T, Tuples>) {
          return "tuples(" + join_constraints(n.components) + ")";
        } else if constexpr (std::is_same_v<T, NpShapes>) {
          return render_shapes(n);
        } else if constexpr (std::is_same_v<T, NpArrays>) {
          std::string out = "np_arrays(np_type=dtype(" +
                            detail::quote_string(dtype_name(n.dtype)) + "), shape=";
          if (const auto* literal = std::get_if<std::vector<std::size_t>>(&n.shape)) {
            std::vector<Value> dims;
            for (auto side : *literal) dims.push_back(Value::integer(static_cast<std::int64_t>(side)));
            out += render_literal(Value::tuple(std::move(dims)));
          } else {
            out += render_shapes(std::get<NpShapes>(n.shape));
          }
          return out + ")";
        } else if constexpr (std::is_same_v<T, Dicts>) {
          return "dicts(keys=" + render_constraint(*n.keys) +
                 ", values=" + render_constraint(*n.values) +
                 ", min_size=" + std::to_string(n.min_size) +
                 ", max_size=" + std::to_string(n.max_size) + ")";
        } else if constexpr (std::is_same_v<T, Anys>) {
          return "anys(" + join_constraints(n.alternatives) + ")";
        } else {
          return "objs(" + (is_identifier(n.gen) ? n.gen : detail::quote_string(n.gen)) + ")";
        }
      },
      c.node);
}

std::string render_spec(const AnnotationSpec& spec) {
  std::string out = "subject " + detail::quote_string(spec.subject) + "\n";
  for (const auto& [name, fa] : spec.functions) render_block(out, "fn", name, fa);
  for (const auto& [name, fa] : spec.generators) render_block(out, "gen", name, fa);
  if (!spec.module_tests.empty()) out += "\n";
  for (const auto& m : spec.module_tests) out += "module_test " + detail::quote_string(m) + "\n";
  return out;
}

std::optional<MethodName> split_method_name(std::string_view qualified) {
  const auto dot = qualified.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == qualified.size()) return std::nullopt;
  return MethodName{std::string(qualified.substr(0, dot)), std::string(qualified.substr(dot + 1))};
}

std::string constructor_name(std::string_view class_name) {
  return std::string(class_name) + ".__init__";
}

}  // namespace ancheck
