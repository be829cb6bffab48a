#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ancheck/errors.hpp"
#include "ancheck/spec.hpp"
#include "fuzz.hpp"

namespace ancheck {
namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(ANCHECK_FIXTURE_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class E>
E expect_error(const std::string& text) {
  try {
    parse_spec(text);
  } catch (const E& e) {
    return e;
  } catch (const std::exception& e) {
    ADD_FAILURE() << "wrong error: " << e.what();
    throw;
  }
  ADD_FAILURE() << "no error for:\n" << text;
  throw std::logic_error("unreachable");
}

TEST(ParseSpec, SingleIntArg) {
  const auto s = parse_spec("subject \"m\"\nfn \"DenseNet\":\n  @arg(depth): ints(min=10, max=100)\n");
  ASSERT_EQ(s.functions.size(), 1u);
  EXPECT_EQ(s.functions[0].first, "DenseNet");
  const auto* fa = s.function("DenseNet");
  ASSERT_NE(fa, nullptr);
  ASSERT_NE(fa->arg("depth"), nullptr);
  EXPECT_EQ(*fa->arg("depth"), Constraint(Ints{10, 100}));
}

TEST(ParseSpec, KwargsDict) {
  const auto s = parse_spec(
      "subject \"m\"\nfn \"f\":\n  @arg(kwargs): dicts(keys=froms([\"input_shape\"]), "
      "values=np_shapes(min_dims=1, max_dims=1))\n");
  const auto* d = s.function("f")->arg("kwargs")->get_if<Dicts>();
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(*d->keys, Constraint(Froms{{Value::str("input_shape")}}));
  EXPECT_EQ(*d->values, Constraint(NpShapes{1, 1, 1, 10}));
  EXPECT_EQ(d->min_size, 0u);
}

TEST(ParseSpec, EmptyFileLacksSubject) {
  const auto e = expect_error<SyntaxError>("");
  EXPECT_EQ(e.message(), "missing subject header");
  EXPECT_GE(e.line(), 1u);
}

TEST(ParseSpec, DanglingGenerator) {
  const auto e = expect_error<ResolutionError>("subject \"m\"\nfn \"g\":\n  @arg(x): objs(missing_gen)\n");
  EXPECT_EQ(e.name(), "missing_gen");
  EXPECT_EQ(e.line(), 3u);
}

TEST(ParseSpec, DuplicateAcrossNamespaces) {
  const auto e = expect_error<DuplicateError>(
      "subject \"m\"\ngen \"a\":\n  @generator\nfn \"a\":\n  @arg(x): bools()\n");
  EXPECT_EQ(e.name(), "a");
  EXPECT_EQ(e.line(), 4u);
}

TEST(ParseSpec, DuplicateArgument) {
  expect_error<DuplicateError>("subject \"m\"\nfn \"f\":\n  @arg(x): bools()\n  @arg(x): bools()\n");
}

TEST(ParseSpec, InvalidConstraintIsASyntaxErrorWithPosition) {
  const auto e = expect_error<SyntaxError>("subject \"m\"\nfn \"f\":\n  @arg(x): ints(min=5, max=3)\n");
  EXPECT_EQ(e.line(), 3u);
  EXPECT_NE(e.message().find("min > max"), std::string::npos);
}

TEST(ParseSpec, ErrorsCarryColumn) {
  const auto e = expect_error<SyntaxError>("subject \"m\"\nfn \"f\":\n  @arg(x): ints(min=)\n");
  EXPECT_EQ(e.line(), 3u);
  EXPECT_GT(e.col(), 3u);
}

TEST(ParseSpec, UnknownIdentifierInRequire) {
  const auto e = expect_error<UnknownIdentifier>(
      "subject \"m\"\nfn \"f\":\n  @arg(x): ints()\n  @require(len(q) > 0)\n");
  EXPECT_EQ(e.name(), "q");
  EXPECT_EQ(e.line(), 4u);
  EXPECT_GT(e.col(), 10u);
}

TEST(ParseRequire, UnknownIdentifier) {
  try {
    parse_require("len(q) > 0", {"x"});
    FAIL();
  } catch (const UnknownIdentifier& e) {
    EXPECT_EQ(e.name(), "q");
    EXPECT_EQ(e.col(), 5u);
  }
}

TEST(ParseRequire, Precedence) {
  const auto e = parse_require("not a < 1 or b and a + 2 * 3 == 7", {"a", "b"});
  EXPECT_EQ(e, parse_require("((not (a < 1)) or (b and ((a + (2 * 3)) == 7)))", {"a", "b"}));
  EXPECT_EQ(render_require(e), "not a < 1 or b and a + 2 * 3 == 7");
  EXPECT_EQ(render_require(parse_require("(a + 1) * 2 > -(a - 1)", {"a"})), "(a + 1) * 2 > -(a - 1)");
}

TEST(ParseRequire, TrueLiteral) {
  EXPECT_EQ(parse_require("true", {}), Expr(expr::Literal{Value::boolean(true)}));
}

TEST(ParseRequire, DenseNetPrecondition) {
  const auto e = parse_require("type_of(dense_layers) != \"list\" or len(dense_layers) == dense_blocks",
                               {"dense_layers", "dense_blocks"});
  EXPECT_EQ(free_identifiers(e), (std::vector<std::string>{"dense_layers", "dense_blocks"}));
  EXPECT_EQ(parse_require(render_require(e), {"dense_layers", "dense_blocks"}), e);
}

TEST(ParseSpec, CcExampleWithGenCall) {
  const auto s = parse_spec(
      "subject \"m\"\ngen \"grids\":\n  @generator\n  @exclude\n"
      "fn \"Img.__init__\":\n  @cc_example([\"image1.png\", gen grids(3, 6, 6, 3), \"gray\"])\n");
  const auto& ex = *s.function("Img.__init__")->cc_example;
  ASSERT_EQ(ex.size(), 3u);
  const auto* call = std::get_if<GenCall>(&ex[1]);
  ASSERT_NE(call, nullptr);
  EXPECT_EQ(call->name, "grids");
  EXPECT_EQ(call->args.size(), 4u);
  EXPECT_EQ(parse_spec(render_spec(s)), s);
}

TEST(ParseSpec, AuxiliaryAnnotations) {
  const auto s = parse_spec(read_fixture("arith.an"));
  EXPECT_EQ(s.subject, "arith");
  EXPECT_TRUE(s.function("slow")->excluded);
  EXPECT_EQ(s.function("slow")->timeout_s, 1.0);
  EXPECT_TRUE(s.generator("make_point")->excluded);
  EXPECT_EQ(s.module_tests, (std::vector<std::string>{"mod_ok", "mod_bad"}));
  // File order is kept.
  EXPECT_EQ(s.functions.front().first, "div");
  EXPECT_EQ(s.functions.back().first, "slow");
}

TEST(ParseSpec, CommentsAndIndentationAreIgnored) {
  const auto a = parse_spec("subject \"m\"\nfn \"f\":\n  @arg(x): bools()\n");
  const auto b = parse_spec("# top\nsubject \"m\"   # trailing\n\nfn \"f\":\n@arg(x):    bools()\n");
  EXPECT_EQ(a, b);
}

TEST(ParseSpec, AllTwelveForms) {
  const std::string text =
      "subject \"m\"\n"
      "gen \"g\":\n  @generator\n"
      "fn \"f\":\n"
      "  @arg(a): froms([1, 2.5, \"s\", none, [1, 2], (3, 4)])\n"
      "  @arg(b): bools()\n"
      "  @arg(c): ints(min=-1)\n"
      "  @arg(d): floats(max=2, exclude_max=true, allow_nan=true, width=32)\n"
      "  @arg(e): lists(ints(), min_len=1, max_len=4)\n"
      "  @arg(f): int_lists(min_len=2)\n"
      "  @arg(g): tuples(bools(), ints())\n"
      "  @arg(h): np_shapes(min_dims=2, max_dims=2, min_side=3, max_side=5)\n"
      "  @arg(i): np_arrays(np_type=dtype(\"int16\"), shape=np_shapes(max_dims=2))\n"
      "  @arg(j): dicts(keys=ints(min=0, max=9), values=bools(), max_size=3)\n"
      "  @arg(k): anys(-1, ints(min=1, max=5))\n"
      "  @arg(l): objs(g)\n";
  const auto s = parse_spec(text);
  const auto* fa = s.function("f");
  ASSERT_EQ(fa->args.size(), 12u);
  std::vector<std::string> forms;
  for (const auto& [n, c] : fa->args) forms.emplace_back(form_name(c));
  EXPECT_EQ(forms, (std::vector<std::string>{"froms", "bools", "ints", "floats", "lists", "int_lists",
                                             "tuples", "np_shapes", "np_arrays", "dicts", "anys", "objs"}));
  EXPECT_EQ(parse_spec(render_spec(s)), s);
}

TEST(RenderSpec, GoldenCanonicalForm) {
  const auto s = parse_spec(read_fixture("densenet.an"));
  EXPECT_EQ(render_spec(s), read_fixture("densenet.canonical.an"));
  EXPECT_EQ(parse_spec(render_spec(s)), s);
}

TEST(RenderSpec, RoundTripsFixtures) {
  for (const char* f : {"densenet.an", "arith.an"}) {
    const auto s = parse_spec(read_fixture(f));
    const auto text = render_spec(s);
    EXPECT_EQ(parse_spec(text), s) << f;
    EXPECT_EQ(render_spec(parse_spec(text)), text) << f;
  }
}

TEST(RenderSpecProperty, RoundTripsRandomSpecs) {
  SplitMix64 rng(33);
  for (int i = 0; i < 500; ++i) {
    const std::string text = fuzz::random_spec_text(rng);
    AnnotationSpec s;
    ASSERT_NO_THROW(s = parse_spec(text)) << text;
    ASSERT_EQ(parse_spec(render_spec(s)), s) << text;
  }
}

TEST(ParseSpecProperty, DeterministicAndTotalOnMutations) {
  // Truncating or corrupting valid input never crashes the parser; it
  // either parses or raises a positioned SpecError.
  SplitMix64 rng(34);
  for (int i = 0; i < 300; ++i) {
    std::string text = fuzz::random_spec_text(rng);
    const auto cut = rng.below(text.size() + 1);
    std::string mutated = text.substr(0, cut);
    if (rng.chance(0.5) && !mutated.empty()) mutated[rng.below(mutated.size())] = "():,\"@x9"[rng.below(8)];
    try {
      const auto a = parse_spec(mutated);
      EXPECT_EQ(parse_spec(mutated), a);
    } catch (const SpecError& e) {
      EXPECT_GE(e.line(), 1u) << mutated;
      EXPECT_GE(e.col(), 1u) << mutated;
    }
  }
}

TEST(SplitMethodName, Forms) {
  const auto m = split_method_name("Stack.push");
  ASSERT_TRUE(m);
  EXPECT_EQ(m->class_name, "Stack");
  EXPECT_EQ(m->method, "push");
  EXPECT_FALSE(split_method_name("div"));
  EXPECT_EQ(constructor_name("C"), "C.__init__");
}

}  // namespace
}  // namespace ancheck
