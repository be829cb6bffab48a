#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ancheck/errors.hpp"
#include "ancheck/literal.hpp"
#include "fuzz.hpp"

namespace ancheck {
namespace {

TEST(RenderLiteral, Scalars) {
  EXPECT_EQ(render_literal(Value::none()), "none");
  EXPECT_EQ(render_literal(Value::boolean(true)), "true");
  EXPECT_EQ(render_literal(Value::integer(-3)), "-3");
  EXPECT_EQ(render_literal(Value::real(2.0)), "2.0");
  EXPECT_EQ(render_literal(Value::real(std::numeric_limits<double>::quiet_NaN())), "nan");
  EXPECT_EQ(render_literal(Value::real(-std::numeric_limits<double>::infinity())), "-inf");
  EXPECT_EQ(render_literal(Value::str("a\"b")), "\"a\\\"b\"");
}

TEST(RenderLiteral, Containers) {
  EXPECT_EQ(render_literal(Value::tuple({Value::integer(1)})), "(1,)");
  EXPECT_EQ(render_literal(Value::tuple({})), "()");
  EXPECT_EQ(render_literal(Value::list({Value::integer(1), Value::integer(2)})), "[1, 2]");
  EXPECT_EQ(render_literal(Value::dict({{Value::str("k"), Value::none()}})), "{\"k\": none}");
  EXPECT_EQ(render_literal(Value::handle(4, "g")), "handle(4, \"g\")");
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-4), "1e-04");
  EXPECT_EQ(format_double(2.0), "2.0");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_double(-0.0), "-0.0");
  // Exponent form still reads back as a float, not an int.
  EXPECT_EQ(parse_literal(format_double(1e300)).kind(), Value::Kind::Float);
  EXPECT_EQ(parse_literal(format_double(1e16)).kind(), Value::Kind::Float);
}

TEST(ParseLiteral, NegativeZeroSurvives) {
  const Value v = parse_literal("-0.0");
  ASSERT_EQ(v.kind(), Value::Kind::Float);
  EXPECT_TRUE(std::signbit(v.as_float()));
}

TEST(ParseLiteral, Errors) {
  EXPECT_THROW(parse_literal("[1, 2"), SyntaxError);
  EXPECT_THROW(parse_literal("1 2"), SyntaxError);
  EXPECT_THROW(parse_literal("\"unterminated"), SyntaxError);
  EXPECT_THROW(parse_literal("{1: 2, 1: 3}"), SyntaxError);
}

TEST(LiteralProperty, RoundTripsRandomValues) {
  SplitMix64 rng(21);
  for (int i = 0; i < 3000; ++i) {
    const Value v = fuzz::random_value(rng);
    const std::string text = render_literal(v);
    const Value back = parse_literal(text);
    ASSERT_TRUE(structural_eq(v, back)) << text;
    ASSERT_EQ(render_literal(back), text);
  }
}

}  // namespace
}  // namespace ancheck
