#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <optional>

#include "ancheck/eval.hpp"
#include "ancheck/random.hpp"
#include "ancheck/require.hpp"

namespace ancheck {
namespace {

EvalResult run(const std::string& text, const Binding& b) {
  std::vector<std::string> names;
  for (const auto& [n, v] : b) names.push_back(n);
  return eval(parse_require(text, names), b);
}

bool is_true(const EvalResult& r) { return std::holds_alternative<bool>(r) && std::get<bool>(r); }
bool is_false(const EvalResult& r) { return std::holds_alternative<bool>(r) && !std::get<bool>(r); }
std::optional<EvalErrorKind> error_kind(const EvalResult& r) {
  if (const auto* e = std::get_if<EvalError>(&r)) return e->kind;
  return std::nullopt;
}

const char* kDense = "type_of(dl) != \"list\" or len(dl) == db";

TEST(Eval, DenseNetPreconditionScalarBranch) {
  EXPECT_TRUE(is_true(run(kDense, {{"dl", Value::integer(-1)}, {"db", Value::integer(3)}})));
}

TEST(Eval, DenseNetPreconditionListBranch) {
  EXPECT_TRUE(is_false(run(kDense, {{"dl", Value::list({Value::integer(2), Value::integer(3)})},
                                    {"db", Value::integer(3)}})));
  EXPECT_TRUE(is_true(run(kDense, {{"dl", Value::list({Value::integer(2), Value::integer(3)})},
                                   {"db", Value::integer(2)}})));
}

TEST(Eval, LenOfIntIsTypeMismatch) {
  EXPECT_EQ(error_kind(run("len(x) > 0", {{"x", Value::integer(5)}})), EvalErrorKind::TypeMismatch);
}

TEST(Eval, TrueDivision) {
  EXPECT_TRUE(is_true(run("6 / 3 == 2", {})));
  EXPECT_TRUE(is_true(run("7 / 2 == 3.5", {})));
  EXPECT_EQ(error_kind(run("1 / 0 == 0", {})), EvalErrorKind::DivisionByZero);
  EXPECT_EQ(error_kind(run("1.5 % 0 == 0", {})), EvalErrorKind::DivisionByZero);
}

TEST(Eval, FloorModulo) {
  EXPECT_TRUE(is_true(run("-7 % 3 == 2", {})));
  EXPECT_TRUE(is_true(run("7 % -3 == -2", {})));
  EXPECT_TRUE(is_true(run("-7.5 % 2 == 0.5", {})));
}

TEST(Eval, Overflow) {
  const Binding b{{"x", Value::integer(std::numeric_limits<std::int64_t>::max())},
                  {"y", Value::integer(std::numeric_limits<std::int64_t>::min())}};
  EXPECT_EQ(error_kind(run("x + 1 > 0", b)), EvalErrorKind::Overflow);
  EXPECT_EQ(error_kind(run("-y > 0", b)), EvalErrorKind::Overflow);
  EXPECT_EQ(error_kind(run("y * -1 > 0", b)), EvalErrorKind::Overflow);
  EXPECT_TRUE(is_true(run("y % -1 == 0", b)));
}

TEST(Eval, ShortCircuitHidesErrors) {
  const Binding b{{"x", Value::integer(5)}};
  EXPECT_TRUE(is_false(run("false and len(x) > 0", b)));
  EXPECT_TRUE(is_true(run("true or len(x) > 0", b)));
  EXPECT_TRUE(error_kind(run("true and len(x) > 0", b)));
  EXPECT_TRUE(error_kind(run("false or len(x) > 0", b)));
}

TEST(Eval, NonBooleanResultIsTypeMismatch) {
  EXPECT_EQ(error_kind(run("1 + 1", {})), EvalErrorKind::TypeMismatch);
  EXPECT_EQ(error_kind(run("not 1", {})), EvalErrorKind::TypeMismatch);
}

TEST(Eval, TypeTags) {
  const std::vector<std::pair<Value, const char*>> cases = {
      {Value::none(), "none"},
      {Value::boolean(true), "bool"},
      {Value::integer(1), "int"},
      {Value::real(1), "float"},
      {Value::str("s"), "str"},
      {Value::list({}), "list"},
      {Value::tuple({}), "tuple"},
      {Value::dict({}), "dict"},
      {Value::ndarray(DType::Int8, {0}, {}), "ndarray"},
      {Value::handle(1, "g"), "handle"},
  };
  for (const auto& [v, tag] : cases) {
    EXPECT_TRUE(is_true(run(std::string("type_of(x) == \"") + tag + "\"", {{"x", v}}))) << tag;
  }
}

TEST(Eval, IndexingAndLength) {
  const Binding b{{"xs", Value::tuple({Value::integer(20), Value::integer(30), Value::integer(3)})},
                  {"d", Value::dict({{Value::str("k"), Value::integer(4)}})},
                  {"s", Value::str("h\xc3\xa9llo")},
                  {"a", Value::ndarray(DType::UInt8, {2, 3}, std::vector<Value>(6, Value::integer(1)))}};
  EXPECT_TRUE(is_true(run("xs[0] == 20 and xs[-1] == 3 and len(xs) == 3", b)));
  EXPECT_EQ(error_kind(run("xs[3] == 0", b)), EvalErrorKind::IndexOutOfRange);
  EXPECT_TRUE(is_true(run("d[\"k\"] == 4 and len(d) == 1", b)));
  EXPECT_EQ(error_kind(run("d[\"z\"] == 4", b)), EvalErrorKind::KeyMissing);
  EXPECT_TRUE(is_true(run("len(s) == 5 and s[1] == \"\xc3\xa9\"", b)));
  EXPECT_TRUE(is_true(run("len(a) == 2 and len(a[0]) == 3 and a[1][2] == 1", b)));
}

TEST(Eval, NumericEqualityAcrossIntAndFloat) {
  EXPECT_TRUE(is_true(run("1 == 1.0", {})));
  EXPECT_TRUE(is_true(run("x != x", {{"x", Value::real(std::numeric_limits<double>::quiet_NaN())}})));
  EXPECT_TRUE(is_true(run("\"a\" < \"b\"", {})));
  EXPECT_EQ(error_kind(run("\"a\" < 1", {})), EvalErrorKind::TypeMismatch);
}

TEST(Eval, HandlesOnlyCompareToNone) {
  const Binding b{{"h", Value::handle(2, "g")}};
  EXPECT_TRUE(is_false(run("h == none", b)));
  EXPECT_EQ(error_kind(run("h == 1", b)), EvalErrorKind::TypeMismatch);
}

TEST(Eval, UnboundIdentifier) {
  const auto e = parse_require("x > 0", {"x"});
  EXPECT_EQ(error_kind(eval(e, {})), EvalErrorKind::UnboundIdentifier);
}

// Property check against an independent interpreter. Trees are well-typed:
// integer nodes over +, -, *, % and indexing, boolean nodes over
// comparisons and connectives. The reference works in 128-bit arithmetic
// and reports the first error in left-to-right evaluation order.

struct Ref;
using RefPtr = std::shared_ptr<Ref>;

struct Ref {
  enum Op { Lit, Var, Neg, Add, Sub, Mul, Mod, Len, At, BLit, Not, And, Or, Lt, Le, Eq, Ne } op;
  std::int64_t lit = 0;
  std::string var;
  RefPtr l, r;
};

using RefVal = std::variant<__int128, bool, EvalErrorKind>;

struct Env {
  std::int64_t a, b;
  std::vector<std::int64_t> xs;
};

RefVal ref_eval(const Ref& n, const Env& env) {
  auto sub = [&](const RefPtr& p) { return ref_eval(*p, env); };
  auto in_range = [](__int128 v) {
    return v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max();
  };
  switch (n.op) {
    case Ref::Lit: return static_cast<__int128>(n.lit);
    case Ref::Var: return static_cast<__int128>(n.var == "a" ? env.a : env.b);
    case Ref::BLit: return n.lit != 0;
    case Ref::Len: return static_cast<__int128>(env.xs.size());
    case Ref::Neg: {
      const auto v = sub(n.l);
      if (std::holds_alternative<EvalErrorKind>(v)) return v;
      const __int128 x = -std::get<__int128>(v);
      if (!in_range(x)) return EvalErrorKind::Overflow;
      return x;
    }
    case Ref::At: {
      const auto v = sub(n.l);
      if (std::holds_alternative<EvalErrorKind>(v)) return v;
      __int128 i = std::get<__int128>(v);
      const auto size = static_cast<__int128>(env.xs.size());
      if (i < 0) i += size;
      if (i < 0 || i >= size) return EvalErrorKind::IndexOutOfRange;
      return static_cast<__int128>(env.xs[static_cast<std::size_t>(i)]);
    }
    case Ref::Not: {
      const auto v = sub(n.l);
      if (std::holds_alternative<EvalErrorKind>(v)) return v;
      return !std::get<bool>(v);
    }
    case Ref::And:
    case Ref::Or: {
      const auto x = sub(n.l);
      if (std::holds_alternative<EvalErrorKind>(x)) return x;
      if (std::get<bool>(x) == (n.op == Ref::Or)) return std::get<bool>(x);
      return sub(n.r);
    }
    default: break;
  }
  const auto x = sub(n.l);
  if (std::holds_alternative<EvalErrorKind>(x)) return x;
  const auto y = sub(n.r);
  if (std::holds_alternative<EvalErrorKind>(y)) return y;
  const __int128 p = std::get<__int128>(x);
  const __int128 q = std::get<__int128>(y);
  __int128 out = 0;
  switch (n.op) {
    case Ref::Add: out = p + q; break;
    case Ref::Sub: out = p - q; break;
    case Ref::Mul: out = p * q; break;
    case Ref::Mod: {
      if (q == 0) return EvalErrorKind::DivisionByZero;
      out = p % q;
      if (out != 0 && ((out < 0) != (q < 0))) out += q;
      break;
    }
    case Ref::Lt: return p < q;
    case Ref::Le: return p <= q;
    case Ref::Eq: return p == q;
    case Ref::Ne: return p != q;
    default: break;
  }
  if (!in_range(out)) return EvalErrorKind::Overflow;
  return out;
}

std::string ref_text(const Ref& n) {
  auto bin = [&](const char* op) { return "(" + ref_text(*n.l) + " " + op + " " + ref_text(*n.r) + ")"; };
  switch (n.op) {
    case Ref::Lit: return n.lit < 0 ? "(-" + std::to_string(-n.lit) + ")" : std::to_string(n.lit);
    case Ref::Var: return n.var;
    case Ref::BLit: return n.lit ? "true" : "false";
    case Ref::Len: return "len(xs)";
    case Ref::Neg: return "(-" + ref_text(*n.l) + ")";
    case Ref::At: return "xs[" + ref_text(*n.l) + "]";
    case Ref::Not: return "(not " + ref_text(*n.l) + ")";
    case Ref::And: return bin("and");
    case Ref::Or: return bin("or");
    case Ref::Add: return bin("+");
    case Ref::Sub: return bin("-");
    case Ref::Mul: return bin("*");
    case Ref::Mod: return bin("%");
    case Ref::Lt: return bin("<");
    case Ref::Le: return bin("<=");
    case Ref::Eq: return bin("==");
    case Ref::Ne: return bin("!=");
  }
  return "";
}

RefPtr make(Ref::Op op, RefPtr l = nullptr, RefPtr r = nullptr) {
  auto n = std::make_shared<Ref>();
  n->op = op;
  n->l = std::move(l);
  n->r = std::move(r);
  return n;
}

RefPtr random_int(SplitMix64& rng, int depth) {
  if (depth == 0 || rng.chance(0.3)) {
    switch (rng.below(3)) {
      case 0: {
        auto n = make(Ref::Lit);
        n->lit = rng.uniform_int(-20, 20);
        return n;
      }
      case 1: {
        auto n = make(Ref::Var);
        n->var = rng.chance(0.5) ? "a" : "b";
        return n;
      }
      default: return make(Ref::Len);
    }
  }
  static constexpr Ref::Op ops[] = {Ref::Neg, Ref::Add, Ref::Sub, Ref::Mul, Ref::Mod, Ref::At};
  const Ref::Op op = ops[rng.below(6)];
  if (op == Ref::Neg || op == Ref::At) return make(op, random_int(rng, depth - 1));
  return make(op, random_int(rng, depth - 1), random_int(rng, depth - 1));
}

RefPtr random_bool(SplitMix64& rng, int depth) {
  if (depth == 0 || rng.chance(0.15)) {
    auto n = make(Ref::BLit);
    n->lit = rng.chance(0.5);
    return n;
  }
  static constexpr Ref::Op ops[] = {Ref::Not, Ref::And, Ref::Or, Ref::Lt, Ref::Le, Ref::Eq, Ref::Ne};
  const Ref::Op op = ops[rng.below(7)];
  if (op == Ref::Not) return make(op, random_bool(rng, depth - 1));
  if (op == Ref::And || op == Ref::Or) return make(op, random_bool(rng, depth - 1), random_bool(rng, depth - 1));
  return make(op, random_int(rng, 3), random_int(rng, 3));
}

std::int64_t random_operand(SplitMix64& rng) {
  if (rng.chance(0.1)) return static_cast<std::int64_t>(rng.next_u64());
  if (rng.chance(0.1)) return rng.chance(0.5) ? std::numeric_limits<std::int64_t>::min() : std::numeric_limits<std::int64_t>::max();
  return rng.uniform_int(-10, 10);
}

TEST(EvalProperty, AgreesWithReferenceInterpreter) {
  SplitMix64 rng(1234);
  std::size_t error_free = 0;
  std::size_t trials = 0;
  while (error_free < 1000) {
    ++trials;
    ASSERT_LT(trials, 20000u);
    const RefPtr tree = random_bool(rng, 4);
    Env env{random_operand(rng), random_operand(rng), {}};
    for (std::uint64_t i = rng.below(4); i > 0; --i) env.xs.push_back(rng.uniform_int(-5, 5));
    std::vector<Value> xs;
    for (auto x : env.xs) xs.push_back(Value::integer(x));
    const Binding b{{"a", Value::integer(env.a)}, {"b", Value::integer(env.b)}, {"xs", Value::list(xs)}};
    const std::string text = ref_text(*tree);
    const RefVal want = ref_eval(*tree, env);
    const EvalResult got = eval(parse_require(text, {"a", "b", "xs"}), b);
    if (const auto* k = std::get_if<EvalErrorKind>(&want)) {
      ASSERT_EQ(error_kind(got), *k) << text << " a=" << env.a << " b=" << env.b;
    } else {
      ++error_free;
      ASSERT_TRUE(std::holds_alternative<bool>(got)) << text << ": " << std::get<EvalError>(got).detail;
      ASSERT_EQ(std::get<bool>(got), std::get<bool>(want)) << text << " a=" << env.a << " b=" << env.b;
    }
  }
}

TEST(RequireProperty, RenderParseRoundTrip) {
  SplitMix64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const std::string text = ref_text(*random_bool(rng, 4));
    const auto e = parse_require(text, {"a", "b", "xs"});
    const auto canon = render_require(e);
    ASSERT_EQ(parse_require(canon, {"a", "b", "xs"}), e) << text;
    ASSERT_EQ(render_require(parse_require(canon, {"a", "b", "xs"})), canon);
  }
}

}  // namespace
}  // namespace ancheck
