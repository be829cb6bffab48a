#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "ancheck/wire.hpp"
#include "fuzz.hpp"
#include "json.hpp"
#include "mock_subject.hpp"

namespace ancheck {
namespace {

TEST(EncodeValue, Tagged) {
  EXPECT_EQ(encode_value(Value::tuple({Value::integer(3), Value::str("a")})), R"({"$t":[3,"a"]})");
  EXPECT_EQ(encode_value(Value::real(std::numeric_limits<double>::quiet_NaN())), R"({"$f":"nan"})");
  EXPECT_EQ(encode_value(Value::real(std::numeric_limits<double>::infinity())), R"({"$f":"+inf"})");
  EXPECT_EQ(encode_value(Value::real(-std::numeric_limits<double>::infinity())), R"({"$f":"-inf"})");
  EXPECT_EQ(encode_value(Value::ndarray(DType::UInt32, {2, 2},
                                        {Value::integer(1), Value::integer(2), Value::integer(3), Value::integer(4)})),
            R"({"$nd":{"dtype":"uint32","shape":[2,2],"data":[1,2,3,4]}})");
  EXPECT_EQ(encode_value(Value::handle(7, "g")), R"({"$h":7})");
  EXPECT_EQ(encode_value(Value::dict({{Value::integer(1), Value::none()}})), R"({"$d":[[1,null]]})");
}

TEST(EncodeValue, Direct) {
  EXPECT_EQ(encode_value(Value::none()), "null");
  EXPECT_EQ(encode_value(Value::boolean(false)), "false");
  EXPECT_EQ(encode_value(Value::integer(-12)), "-12");
  EXPECT_EQ(encode_value(Value::real(2.0)), "2.0");
  EXPECT_EQ(encode_value(Value::real(0.1)), "0.1");
  EXPECT_EQ(encode_value(Value::list({Value::str("\xc3\xa9\n")})), "[\"\xc3\xa9\\n\"]");
}

TEST(DecodeValue, Inverse) {
  EXPECT_TRUE(structural_eq(decode_value(R"({"$t":[3,"a"]})"), Value::tuple({Value::integer(3), Value::str("a")})));
  EXPECT_EQ(decode_value("2.0").kind(), Value::Kind::Float);
  EXPECT_EQ(decode_value("2").kind(), Value::Kind::Int);
  EXPECT_TRUE(std::signbit(decode_value("-0.0").as_float()));
  const Value h = decode_value(R"({"$h":7})");
  EXPECT_TRUE(structural_eq(h, Value::handle(7, "")));
}

TEST(DecodeValue, ShapeDataMismatch) {
  try {
    decode_value(R"({"$nd":{"dtype":"uint32","shape":[2],"data":[1,2,3]}})");
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.path(), "$.$nd");
  }
}

TEST(DecodeValue, MalformedJsonReportsOffset) {
  try {
    decode_value("[1, 2,");
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_GE(e.offset(), 5u);
  }
}

TEST(DecodeValue, RuleViolations) {
  for (const char* bad : {
           R"({"x":1})",                                  // untagged object
           R"({"$f":"NaN"})",                              // wrong spelling
           R"({"$d":[[1,2],[1,3]]})",                      // duplicate key
           R"({"$d":[[[1],2]]})",                          // unhashable key
           R"({"$nd":{"dtype":"uint8","shape":[1],"data":[256]}})",
           R"({"$nd":{"dtype":"complex","shape":[1],"data":[1]}})",
           R"({"$h":-1})",
           R"({"$t":[1],"$h":2})",
           "18446744073709551616",
           "-9223372036854775809",
           "9223372036854775808",  // fits uint64 but not a value
       }) {
    EXPECT_THROW(decode_value(bad), DecodeError) << bad;
  }
}

TEST(DecodeValue, IntegerExtremes) {
  EXPECT_EQ(decode_value("-9223372036854775808").as_int(), std::numeric_limits<std::int64_t>::min());
  EXPECT_EQ(decode_value("9223372036854775807").as_int(), std::numeric_limits<std::int64_t>::max());
  EXPECT_EQ(decode_value("[\"99999999999999999999\"]").as_list().items[0].as_str(), "99999999999999999999");
  try {
    decode_value("[1, 123456789012345678901]");
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(WireProperty, ValueRoundTrip) {
  SplitMix64 rng(101);
  for (int i = 0; i < 10000; ++i) {
    const Value v = fuzz::random_value(rng);
    const std::string line = encode_value(v);
    ASSERT_EQ(line.find('\n'), std::string::npos);
    const Value back = decode_value(line);
    ASSERT_TRUE(structural_eq(v, back)) << line;
    ASSERT_EQ(encode_value(back), line);
  }
}

TEST(Request, FieldRules) {
  EXPECT_THROW(decode_request(R"({"id":1,"op":"call","args":[]})"), DecodeError);
  EXPECT_THROW(decode_request(R"({"id":1,"op":"fly","args":[]})"), DecodeError);
  EXPECT_THROW(decode_request(R"({"op":"reset","args":[]})"), DecodeError);
  EXPECT_THROW(decode_request(R"({"id":1,"op":"call","target":"f","args":[],"kwargs":[1]})"), DecodeError);
  const Request r = decode_request(R"({"id":4,"op":"construct","target":"C","args":[1],"timeout_ms":5})");
  EXPECT_EQ(r.op, Op::Construct);
  EXPECT_EQ(r.timeout_ms, 5u);
}

TEST(Response, CrashNeedsTypeAndLocation) {
  EXPECT_THROW(decode_response(R"({"id":1,"status":"crash","location":"a.py:1"})"), DecodeError);
  EXPECT_THROW(decode_response(R"({"id":1,"status":"crash","exc_type":"E"})"), DecodeError);
  const Response r = decode_response(R"({"id":1,"status":"crash","exc_type":"E","location":"a.py:1"})");
  EXPECT_EQ(r.status, Status::Crash);
}

TEST(Response, RoundTrip) {
  Response r;
  r.id = 9;
  r.status = Status::Crash;
  r.exc_type = "ValueError";
  r.message = "bad";
  r.location = "m.py:3";
  r.frames = std::vector<std::string>{"m.py:3:f"};
  EXPECT_EQ(decode_response(encode_response(r)), r);
}

struct ConformancePair {
  std::string request;
  std::string response;
};

std::vector<ConformancePair> load_conformance() {
  std::ifstream in(std::string(ANCHECK_FIXTURE_DIR) + "/wire_v1_conformance.jsonl");
  std::vector<ConformancePair> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    out.push_back({j.at("request").get<std::string>(), j.at("response").get<std::string>()});
  }
  return out;
}

TEST(Conformance, LinesAreCanonical) {
  const auto pairs = load_conformance();
  ASSERT_GE(pairs.size(), 10u);
  for (const auto& p : pairs) {
    EXPECT_EQ(encode_response(decode_response(p.response)), p.response);
    try {
      EXPECT_EQ(encode_request(decode_request(p.request)), p.request);
    } catch (const DecodeError&) {
      // Deliberately undecodable requests are answered `invalid`.
      EXPECT_EQ(decode_response(p.response).status, Status::Invalid) << p.request;
    }
  }
}

TEST(Conformance, MockWorkerReplaysFixture) {
  auto subject = mock::make_subject("arith");
  for (const auto& p : load_conformance()) {
    const Reply reply = subject->handle(p.request);
    ASSERT_EQ(reply.kind, Reply::Kind::Line);
    EXPECT_EQ(reply.line, p.response) << p.request;
  }
}

}  // namespace
}  // namespace ancheck
