#pragma once

// Line-delimited JSON encoding of values, requests and responses (protocol
// version 1).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ancheck/value.hpp"

namespace ancheck {

inline constexpr std::int64_t kProtocolVersion = 1;

// `offset` is the byte position for malformed JSON; for well-formed JSON that
// breaks a value rule it is 0 and `path` names the offending node.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::size_t offset, std::string path, const std::string& reason)
      : std::runtime_error("offset " + std::to_string(offset) + " at " + path + ": " + reason),
        offset_(offset),
        path_(std::move(path)),
        reason_(reason) {}

  std::size_t offset() const { return offset_; }
  const std::string& path() const { return path_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t offset_;
  std::string path_;
  std::string reason_;
};

// Canonical single-line JSON. Handles encode their id only.
std::string encode_value(const Value& v);

// Handles decode with an empty generator name; the caller knows which
// construct produced each id.
Value decode_value(std::string_view text);

enum class Op { Hello, Call, Construct, ModuleTest, Reset, Shutdown };
enum class Status { Ok, Crash, Timeout, Invalid };

std::string_view op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);
std::string_view status_name(Status s);
std::optional<Status> status_from_name(std::string_view name);

struct Request {
  std::uint64_t id = 0;
  Op op = Op::Hello;
  std::optional<std::string> target;
  std::vector<Value> args;
  std::optional<Value> kwargs;  // a Dict with Str keys
  std::optional<std::uint64_t> timeout_ms;

  bool operator==(const Request&) const = default;
};

struct Response {
  std::uint64_t id = 0;
  Status status = Status::Ok;
  std::optional<Value> value;
  std::optional<std::string> exc_type;
  std::optional<std::string> message;
  std::optional<std::string> location;  // "file:line"
  std::optional<std::vector<std::string>> frames;  // "file:line:function", at most 10

  bool operator==(const Response&) const = default;
};

// No trailing newline.
std::string encode_request(const Request& r);
std::string encode_response(const Response& r);

// Throw DecodeError on malformed lines or broken field rules (missing target
// on call/construct, crash without exc_type/location, ...).
Request decode_request(std::string_view line);
Response decode_response(std::string_view line);

}  // namespace ancheck
