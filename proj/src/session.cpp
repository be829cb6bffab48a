#include "ancheck/session.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace ancheck {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

Response worker_died(std::uint64_t id) {
  Response r;
  r.id = id;
  r.status = Status::Crash;
  r.exc_type = "WorkerDied";
  r.message = "worker process exited mid-request";
  r.location = "<process>";
  return r;
}

SubprocessChannel::SubprocessChannel(std::string command, std::string subject)
    : command_(std::move(command)), subject_(std::move(subject)) {}

SubprocessChannel::~SubprocessChannel() { kill(); }

void SubprocessChannel::start() {
  kill();
  ::signal(SIGPIPE, SIG_IGN);
  int in[2];
  int out[2];
  if (::pipe2(in, O_CLOEXEC) != 0) throw ProtocolError("pipe: " + std::string(std::strerror(errno)));
  if (::pipe2(out, O_CLOEXEC) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw ProtocolError("pipe: " + std::string(std::strerror(errno)));
  }
  const std::string full = "exec " + command_ + " " + shell_quote(subject_);
  const pid_t pid = ::fork();
  if (pid < 0) throw ProtocolError("fork: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", full.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in[0]);
  ::close(out[1]);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
  buffer_.clear();
}

bool SubprocessChannel::send(const std::string& line) {
  if (to_child_ < 0) return false;
  const std::string data = line + "\n";
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    done += static_cast<std::size_t>(n);
  }
  return true;
}

Received SubprocessChannel::receive(std::chrono::milliseconds timeout) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + timeout;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      Received r{Received::Kind::Line, buffer_.substr(0, nl)};
      buffer_.erase(0, nl + 1);
      if (!r.line.empty() && r.line.back() == '\r') r.line.pop_back();
      return r;
    }
    if (from_child_ < 0) return {Received::Kind::Closed, {}};
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
    if (left <= 0) return {Received::Kind::Timeout, {}};
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      return {Received::Kind::Closed, {}};
    }
    if (ready == 0) return {Received::Kind::Timeout, {}};
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      close_fd(from_child_);
      return {Received::Kind::Closed, {}};
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void SubprocessChannel::kill() {
  close_fd(to_child_);
  close_fd(from_child_);
  if (pid_ > 0) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
  }
  pid_ = -1;
  buffer_.clear();
}

void InProcessChannel::start() {
  handler_ = spawn_();
  pending_.clear();
  alive_ = true;
  ++starts_;
}

bool InProcessChannel::send(const std::string& line) {
  if (!alive_) return false;
  pending_.push_back(handler_(line));
  return true;
}

Received InProcessChannel::receive(std::chrono::milliseconds) {
  if (pending_.empty()) {
    return {alive_ ? Received::Kind::Timeout : Received::Kind::Closed, {}};
  }
  Reply r = std::move(pending_.front());
  pending_.pop_front();
  switch (r.kind) {
    case Reply::Kind::Line:
      return {Received::Kind::Line, std::move(r.line)};
    case Reply::Kind::Hang:
      return {Received::Kind::Timeout, {}};
    case Reply::Kind::Die:
      alive_ = false;
      pending_.clear();
      return {Received::Kind::Closed, {}};
  }
  return {Received::Kind::Closed, {}};
}

void InProcessChannel::kill() {
  alive_ = false;
  pending_.clear();
}

Session::Session(std::unique_ptr<Channel> channel, SessionOptions options)
    : channel_(std::move(channel)), options_(options) {}

Session::~Session() {
  if (channel_) channel_->kill();
}

void Session::start() {
  channel_->start();
  handshake();
  running_ = true;
}

void Session::handshake() {
  Request hello;
  hello.id = next_id_++;
  hello.op = Op::Hello;
  hello.args = {Value::integer(kProtocolVersion)};
  const std::string line = encode_request(hello);
  if (transcript_) transcript_->push_back("> " + line);
  if (!channel_->send(line)) throw ProtocolError("handshake failed: worker exited before hello");
  const Received got = channel_->receive(options_.handshake_timeout);
  if (got.kind == Received::Kind::Closed) {
    throw ProtocolError("handshake failed: worker exited before answering hello");
  }
  if (got.kind == Received::Kind::Timeout) {
    throw ProtocolError("handshake failed: no answer to hello");
  }
  if (transcript_) transcript_->push_back("< " + got.line);
  Response r;
  try {
    r = decode_response(got.line);
  } catch (const DecodeError& e) {
    throw ProtocolError("handshake failed: malformed response: " + std::string(e.what()));
  }
  if (r.id != hello.id || r.status != Status::Ok || !r.value ||
      !structural_eq(*r.value, Value::integer(kProtocolVersion))) {
    throw ProtocolError("handshake failed: worker does not speak protocol version 1");
  }
}

void Session::respawn() {
  ++restarts_;
  channel_->start();
  handshake();
  Request reset;
  reset.id = next_id_++;
  reset.op = Op::Reset;
  const std::string line = encode_request(reset);
  if (transcript_) transcript_->push_back("> " + line);
  if (!channel_->send(line)) throw ProtocolError("respawned worker exited before reset");
  const Received got = channel_->receive(options_.handshake_timeout);
  if (got.kind != Received::Kind::Line) throw ProtocolError("respawned worker did not answer reset");
  if (transcript_) transcript_->push_back("< " + got.line);
  Response r;
  try {
    r = decode_response(got.line);
  } catch (const DecodeError& e) {
    throw ProtocolError("malformed response line: " + std::string(e.what()));
  }
  if (r.id != reset.id || r.status != Status::Ok) {
    throw ProtocolError("respawned worker rejected reset");
  }
}

Response Session::exchange(const Request& req0, std::chrono::milliseconds wait) {
  Request req = req0;
  req.id = next_id_++;
  const std::string line = encode_request(req);
  if (transcript_) transcript_->push_back("> " + line);
  if (!channel_->send(line)) {
    respawn();
    return worker_died(req.id);
  }
  const Received got = channel_->receive(wait);
  switch (got.kind) {
    case Received::Kind::Timeout: {
      channel_->kill();
      respawn();
      Response r;
      r.id = req.id;
      r.status = Status::Timeout;
      r.message = "no response within " + std::to_string(wait.count()) + " ms";
      return r;
    }
    case Received::Kind::Closed:
      respawn();
      return worker_died(req.id);
    case Received::Kind::Line:
      break;
  }
  if (transcript_) transcript_->push_back("< " + got.line);
  Response r;
  try {
    r = decode_response(got.line);
  } catch (const DecodeError& e) {
    throw ProtocolError("malformed response line: " + std::string(e.what()));
  }
  if (r.id != req.id) {
    throw ProtocolError("response id " + std::to_string(r.id) + " does not match request id " +
                        std::to_string(req.id));
  }
  return r;
}

Response Session::call(Request req) {
  if (!running_) throw ProtocolError("session not started");
  const auto wait = (req.timeout_ms ? std::chrono::milliseconds(*req.timeout_ms)
                                    : options_.default_wait) +
                    options_.grace;
  return exchange(req, wait);
}

void Session::shutdown() {
  if (!running_) return;
  running_ = false;
  Request bye;
  bye.id = next_id_++;
  bye.op = Op::Shutdown;
  const std::string line = encode_request(bye);
  if (transcript_) transcript_->push_back("> " + line);
  if (channel_->send(line)) {
    const Received got = channel_->receive(options_.grace);
    if (got.kind == Received::Kind::Line && transcript_) transcript_->push_back("< " + got.line);
  }
  channel_->kill();
}

}  // namespace ancheck
