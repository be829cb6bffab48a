#pragma once

// Worker transport and request/response sessions.

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ancheck/wire.hpp"

namespace ancheck {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Received {
  enum class Kind { Line, Timeout, Closed };
  Kind kind = Kind::Closed;
  std::string line;
};

// A bidirectional line pipe to one worker process.
class Channel {
 public:
  virtual ~Channel() = default;
  // Starts (or restarts) the worker; any previous one is killed first.
  virtual void start() = 0;
  // False when the worker is gone.
  virtual bool send(const std::string& line) = 0;
  virtual Received receive(std::chrono::milliseconds timeout) = 0;
  virtual void kill() = 0;
};

// Runs `/bin/sh -c "<command> '<subject>'"` with the worker's stdin and
// stdout on pipes. Worker stderr is inherited.
class SubprocessChannel : public Channel {
 public:
  SubprocessChannel(std::string command, std::string subject);
  ~SubprocessChannel() override;
  SubprocessChannel(const SubprocessChannel&) = delete;
  SubprocessChannel& operator=(const SubprocessChannel&) = delete;

  void start() override;
  bool send(const std::string& line) override;
  Received receive(std::chrono::milliseconds timeout) override;
  void kill() override;

 private:
  std::string command_;
  std::string subject_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

// What an in-process worker does with one request line.
struct Reply {
  enum class Kind { Line, Hang, Die };
  Kind kind = Kind::Line;
  std::string line;

  static Reply answer(std::string l) { return {Kind::Line, std::move(l)}; }
  static Reply hang() { return {Kind::Hang, {}}; }
  static Reply die() { return {Kind::Die, {}}; }
};

using LineHandler = std::function<Reply(const std::string& request_line)>;

// Worker living in the calling process; `spawn` builds the handler for each
// (re)start so worker state resets the same way a new process would. A hang
// reports a timeout at once instead of waiting it out.
class InProcessChannel : public Channel {
 public:
  explicit InProcessChannel(std::function<LineHandler()> spawn) : spawn_(std::move(spawn)) {}

  void start() override;
  bool send(const std::string& line) override;
  Received receive(std::chrono::milliseconds timeout) override;
  void kill() override;

  std::size_t starts() const { return starts_; }

 private:
  std::function<LineHandler()> spawn_;
  LineHandler handler_;
  std::deque<Reply> pending_;
  bool alive_ = false;
  std::size_t starts_ = 0;
};

struct SessionOptions {
  std::chrono::milliseconds grace{2000};
  std::chrono::milliseconds handshake_timeout{30000};
  // Used when a request carries no timeout_ms.
  std::chrono::milliseconds default_wait{60000};
};

// One worker, one request in flight. Ids are assigned here and strictly
// increase across restarts.
class Session {
 public:
  explicit Session(std::unique_ptr<Channel> channel, SessionOptions options = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  // Spawns the worker and exchanges hello. Throws ProtocolError.
  void start();

  // Sends `req` with a fresh id and returns the matching response. Worker
  // death and hard timeouts come back as synthesized responses; the worker is
  // respawned and sent a reset. Throws ProtocolError on a bad or mismatched
  // line, or when the respawned worker fails its handshake.
  Response call(Request req);

  void shutdown();

  std::uint64_t restarts() const { return restarts_; }
  std::uint64_t last_id() const { return next_id_ - 1; }

  // Every line sent and received, prefixed "> " and "< ".
  void set_transcript(std::vector<std::string>* sink) { transcript_ = sink; }

 private:
  Response exchange(const Request& req, std::chrono::milliseconds wait);
  void handshake();
  void respawn();

  std::unique_ptr<Channel> channel_;
  SessionOptions options_;
  std::uint64_t next_id_ = 1;
  std::uint64_t restarts_ = 0;
  bool running_ = false;
  std::vector<std::string>* transcript_ = nullptr;
};

// Response synthesized when the worker process dies mid-request.
Response worker_died(std::uint64_t id);

}  // namespace ancheck
