#include <gtest/gtest.h>

#include <chrono>

#include "ancheck/session.hpp"
#include "mock_subject.hpp"

namespace ancheck {
namespace {

using namespace std::chrono_literals;

Request call(const std::string& target, Binding kwargs = {}, std::optional<std::uint64_t> timeout_ms = {}) {
  Request r;
  r.op = Op::Call;
  r.target = target;
  std::vector<std::pair<Value, Value>> entries;
  for (auto& [k, v] : kwargs) entries.emplace_back(Value::str(k), v);
  r.kwargs = Value::dict(std::move(entries));
  r.timeout_ms = timeout_ms;
  return r;
}

// Channel whose worker answers with canned lines, for protocol violations.
std::unique_ptr<InProcessChannel> scripted(std::vector<std::string> lines) {
  return std::make_unique<InProcessChannel>([lines]() {
    auto n = std::make_shared<std::size_t>(0);
    return LineHandler([lines, n](const std::string&) {
      if (*n >= lines.size()) return Reply::die();
      return Reply::answer(lines[(*n)++]);
    });
  });
}

TEST(Session, OkAndCrash) {
  Session s(mock::in_process("arith"));
  s.start();
  const Response ok = s.call(call("div", {{"a", Value::integer(6)}, {"b", Value::integer(3)}}));
  EXPECT_EQ(ok.status, Status::Ok);
  const Response crash = s.call(call("div", {{"a", Value::integer(6)}, {"b", Value::integer(0)}}));
  EXPECT_EQ(crash.status, Status::Crash);
  EXPECT_EQ(crash.exc_type, "ZeroDivisionError");
  EXPECT_EQ(crash.location, "arith.py:3");
}

TEST(Session, IdsStrictlyIncrease) {
  std::vector<std::string> transcript;
  Session s(mock::in_process("arith"));
  s.set_transcript(&transcript);
  s.start();
  std::uint64_t last = s.last_id();
  for (int i = 0; i < 5; ++i) {
    const Response r = s.call(call("lt", {{"a", Value::integer(0)}, {"b", Value::integer(1)}}));
    EXPECT_GT(r.id, last);
    last = r.id;
  }
  s.call(call("boom"));
  const Response after = s.call(call("lt", {{"a", Value::integer(0)}, {"b", Value::integer(1)}}));
  EXPECT_GT(after.id, last);
}

TEST(Session, WorkerDeathIsSynthesizedAndRespawns) {
  auto channel = mock::in_process("arith");
  auto* raw = channel.get();
  std::vector<std::string> transcript;
  Session s(std::move(channel));
  s.set_transcript(&transcript);
  s.start();
  const Response r = s.call(call("boom"));
  EXPECT_EQ(r.status, Status::Crash);
  EXPECT_EQ(r.exc_type, "WorkerDied");
  EXPECT_EQ(r.location, "<process>");
  EXPECT_EQ(s.restarts(), 1u);
  EXPECT_EQ(raw->starts(), 2u);
  // Handshake then reset were replayed on the fresh worker.
  ASSERT_GE(transcript.size(), 4u);
  EXPECT_NE(transcript[transcript.size() - 4].find("\"op\":\"hello\""), std::string::npos);
  EXPECT_NE(transcript[transcript.size() - 2].find("\"op\":\"reset\""), std::string::npos);
  EXPECT_EQ(s.call(call("lt", {{"a", Value::integer(0)}, {"b", Value::integer(1)}})).status, Status::Ok);
}

TEST(Session, HangBecomesTimeout) {
  Session s(mock::in_process("arith"));
  s.start();
  const Response r = s.call(call("slow", {}, 10));
  EXPECT_EQ(r.status, Status::Timeout);
  EXPECT_EQ(s.restarts(), 1u);
}

TEST(Session, BadHandshake) {
  Session wrong_version(scripted({R"({"id":1,"status":"ok","value":2})"}));
  EXPECT_THROW(wrong_version.start(), ProtocolError);
  Session garbage(scripted({"hello"}));
  EXPECT_THROW(garbage.start(), ProtocolError);
  Session silent(scripted({}));
  EXPECT_THROW(silent.start(), ProtocolError);
}

TEST(Session, IdMismatch) {
  Session s(scripted({R"({"id":1,"status":"ok","value":1})", R"({"id":7,"status":"ok"})"}));
  s.start();
  EXPECT_THROW(s.call(call("f")), ProtocolError);
}

TEST(Session, MalformedLine) {
  Session s(scripted({R"({"id":1,"status":"ok","value":1})", R"({"id":2,"status":"crash"})"}));
  s.start();
  EXPECT_THROW(s.call(call("f")), ProtocolError);
}

TEST(Session, NotStarted) {
  Session s(mock::in_process("arith"));
  EXPECT_THROW(s.call(call("lt")), ProtocolError);
}

SessionOptions quick() {
  SessionOptions o;
  o.grace = 200ms;
  o.handshake_timeout = 5000ms;
  return o;
}

TEST(SubprocessSession, RoundTrip) {
  Session s(std::make_unique<SubprocessChannel>(ANCHECK_FIXTURE_WORKER, "arith"), quick());
  s.start();
  const Response r = s.call(call("div", {{"a", Value::integer(7)}, {"b", Value::integer(2)}}));
  EXPECT_EQ(r.status, Status::Ok);
  EXPECT_TRUE(structural_eq(*r.value, Value::real(3.5)));
  s.shutdown();
}

TEST(SubprocessSession, HardTimeoutKillsAndRespawns) {
  Session s(std::make_unique<SubprocessChannel>(ANCHECK_FIXTURE_WORKER, "arith"), quick());
  s.start();
  const auto t0 = std::chrono::steady_clock::now();
  const Response r = s.call(call("slow", {}, 100));
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  EXPECT_EQ(r.status, Status::Timeout);
  EXPECT_GE(elapsed, 300ms);
  EXPECT_LT(elapsed, 5s);
  EXPECT_EQ(s.restarts(), 1u);
  EXPECT_EQ(s.call(call("lt", {{"a", Value::integer(0)}, {"b", Value::integer(1)}})).status, Status::Ok);
}

TEST(SubprocessSession, DeathIsSynthesized) {
  Session s(std::make_unique<SubprocessChannel>(ANCHECK_FIXTURE_WORKER, "arith"), quick());
  s.start();
  const Response r = s.call(call("boom"));
  EXPECT_EQ(r.exc_type, "WorkerDied");
  EXPECT_EQ(s.call(call("lt", {{"a", Value::integer(0)}, {"b", Value::integer(1)}})).status, Status::Ok);
}

TEST(SubprocessSession, MissingCommandFailsHandshake) {
  Session s(std::make_unique<SubprocessChannel>("/nonexistent/worker", "arith"), quick());
  EXPECT_THROW(s.start(), ProtocolError);
}

}  // namespace
}  // namespace ancheck
