#include "ancheck/wire.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

#include "ancheck/literal.hpp"

namespace ancheck {

namespace {

using json = nlohmann::ordered_json;

std::string json_string(std::string_view s) {
  return json(std::string(s)).dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string encode_float(double d) {
  if (std::isnan(d)) return R"({"$f":"nan"})";
  if (std::isinf(d)) return d > 0 ? R"({"$f":"+inf"})" : R"({"$f":"-inf"})";
  return format_double(d);
}

void encode_into(std::string& out, const Value& v);

void encode_items(std::string& out, const std::vector<Value>& items) {
  out += '[';
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    encode_into(out, items[i]);
  }
  out += ']';
}

void encode_into(std::string& out, const Value& v) {
  switch (v.kind()) {
    case Value::Kind::None:
      out += "null";
      return;
    case Value::Kind::Bool:
      out += v.as_bool() ? "true" : "false";
      return;
    case Value::Kind::Int:
      out += std::to_string(v.as_int());
      return;
    case Value::Kind::Float:
      out += encode_float(v.as_float());
      return;
    case Value::Kind::Str:
      out += json_string(v.as_str());
      return;
    case Value::Kind::List:
      encode_items(out, v.as_list().items);
      return;
    case Value::Kind::Tuple:
      out += R"({"$t":)";
      encode_items(out, v.as_tuple().items);
      out += '}';
      return;
    case Value::Kind::Dict: {
      out += R"({"$d":[)";
      const auto& entries = v.as_dict().entries;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) out += ',';
        out += '[';
        encode_into(out, entries[i].first);
        out += ',';
        encode_into(out, entries[i].second);
        out += ']';
      }
      out += "]}";
      return;
    }
    case Value::Kind::NdArray: {
      const auto& nd = v.as_ndarray();
      out += R"({"$nd":{"dtype":)";
      out += json_string(dtype_name(nd.dtype));
      out += R"(,"shape":[)";
      for (std::size_t i = 0; i < nd.shape.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(nd.shape[i]);
      }
      out += R"(],"data":)";
      encode_items(out, nd.data);
      out += "}}";
      return;
    }
    case Value::Kind::Handle:
      out += R"({"$h":)" + std::to_string(v.as_handle().id) + "}";
      return;
  }
}

[[noreturn]] void bad(const std::string& path, const std::string& reason) {
  throw DecodeError(0, path, reason);
}

// The JSON reader silently turns integers wider than 64 bits into doubles,
// so integer tokens are range-checked on the raw text first.
void check_integer_tokens(std::string_view text) {
  static constexpr std::string_view kMax = "18446744073709551615";
  static constexpr std::string_view kMinMagnitude = "9223372036854775808";
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_string) {
      if (ch == '\\') ++i;
      else if (ch == '"') in_string = false;
      continue;
    }
    if (ch == '"') {
      in_string = true;
      continue;
    }
    if (ch != '-' && (ch < '0' || ch > '9')) continue;
    const std::size_t start = i;
    bool integral = true;
    while (i < text.size() && std::string_view("0123456789+-.eE").find(text[i]) != std::string_view::npos) {
      if (text[i] == '.' || text[i] == 'e' || text[i] == 'E') integral = false;
      ++i;
    }
    std::string_view digits = text.substr(start, i - start);
    std::string_view limit = kMax;
    if (!digits.empty() && digits[0] == '-') {
      digits.remove_prefix(1);
      limit = kMinMagnitude;
    }
    if (integral && (digits.size() > limit.size() || (digits.size() == limit.size() && digits > limit))) {
      throw DecodeError(start, "$", "integer out of range");
    }
    --i;
  }
}

json parse_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw DecodeError(e.byte, "$", "malformed JSON");
  }
  check_integer_tokens(text);
  return j;
}

std::int64_t as_int64(const json& j, const std::string& path) {
  if (j.is_number_integer() && !j.is_number_unsigned()) return j.get<std::int64_t>();
  if (j.is_number_unsigned()) {
    const auto u = j.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      bad(path, "integer out of range");
    }
    return static_cast<std::int64_t>(u);
  }
  bad(path, "expected an integer");
}

std::uint64_t as_nat(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  bad(path, "expected a non-negative integer");
}

Value value_from_json(const json& j, const std::string& path);

std::vector<Value> items_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array");
  std::vector<Value> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(value_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Value ndarray_from_json(const json& body, const std::string& path) {
  if (!body.is_object() || body.size() != 3 || !body.contains("dtype") ||
      !body.contains("shape") || !body.contains("data")) {
    bad(path, "ndarray needs exactly dtype, shape and data");
  }
  const json& dt = body["dtype"];
  std::optional<DType> dtype;
  if (dt.is_string()) dtype = dtype_from_name(dt.get<std::string>());
  if (!dtype) bad(path + ".dtype", "unknown dtype");
  const json& shape_json = body["shape"];
  if (!shape_json.is_array()) bad(path + ".shape", "expected an array");
  std::vector<std::size_t> shape;
  for (std::size_t i = 0; i < shape_json.size(); ++i) {
    shape.push_back(static_cast<std::size_t>(
        as_nat(shape_json[i], path + ".shape[" + std::to_string(i) + "]")));
  }
  std::vector<Value> data = items_from_json(body["data"], path + ".data");
  if (dtype_is_float(*dtype)) {
    // Workers may write integral floats without a fraction.
    for (auto& e : data) {
      if (e.kind() == Value::Kind::Int) e = Value::real(static_cast<double>(e.as_int()));
    }
  }
  std::size_t expected = 1;
  for (auto side : shape) expected *= side;
  if (expected != data.size()) bad(path, "shape does not match data length");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!dtype_admits(*dtype, data[i])) {
      bad(path + ".data[" + std::to_string(i) + "]", "element outside dtype");
    }
  }
  return Value::ndarray(*dtype, std::move(shape), std::move(data));
}

Value value_from_json(const json& j, const std::string& path) {
  switch (j.type()) {
    case json::value_t::null:
      return Value::none();
    case json::value_t::boolean:
      return Value::boolean(j.get<bool>());
    case json::value_t::number_integer:
    case json::value_t::number_unsigned:
      return Value::integer(as_int64(j, path));
    case json::value_t::number_float:
      return Value::real(j.get<double>());
    case json::value_t::string:
      return Value::str(j.get<std::string>());
    case json::value_t::array:
      return Value::list(items_from_json(j, path));
    case json::value_t::object:
      break;
    default:
      bad(path, "unsupported JSON value");
  }
  if (j.size() != 1) bad(path, "tagged object must have exactly one key");
  const std::string& tag = j.begin().key();
  const json& body = j.begin().value();
  const std::string sub = path + "." + tag;
  if (tag == "$t") return Value::tuple(items_from_json(body, sub));
  if (tag == "$d") {
    if (!body.is_array()) bad(sub, "expected an array of pairs");
    std::vector<std::pair<Value, Value>> entries;
    for (std::size_t i = 0; i < body.size(); ++i) {
      const std::string at = sub + "[" + std::to_string(i) + "]";
      if (!body[i].is_array() || body[i].size() != 2) bad(at, "expected a [key, value] pair");
      entries.emplace_back(value_from_json(body[i][0], at + "[0]"), value_from_json(body[i][1], at + "[1]"));
    }
    Value out = Value::dict(std::move(entries));
    if (!well_formed(out)) bad(sub, "dict keys must be distinct and hashable");
    return out;
  }
  if (tag == "$f") {
    if (body.is_string()) {
      const auto s = body.get<std::string>();
      if (s == "nan") return Value::real(std::numeric_limits<double>::quiet_NaN());
      if (s == "+inf") return Value::real(std::numeric_limits<double>::infinity());
      if (s == "-inf") return Value::real(-std::numeric_limits<double>::infinity());
    }
    bad(sub, "expected \"nan\", \"+inf\" or \"-inf\"");
  }
  if (tag == "$nd") return ndarray_from_json(body, sub);
  if (tag == "$h") return Value::handle(as_nat(body, sub), "");
  bad(path, "unknown tag '" + tag + "'");
}

const json& field(const json& obj, const char* name) {
  if (!obj.contains(name)) bad("$", std::string("missing field '") + name + "'");
  return obj[name];
}

std::optional<std::string> optional_string(const json& obj, const char* name) {
  if (!obj.contains(name) || obj[name].is_null()) return std::nullopt;
  if (!obj[name].is_string()) bad(std::string("$.") + name, "expected a string");
  return obj[name].get<std::string>();
}

json object_line(std::string_view line) {
  json j = parse_json(line);
  if (!j.is_object()) bad("$", "expected a JSON object");
  return j;
}

}  // namespace

std::string encode_value(const Value& v) {
  std::string out;
  encode_into(out, v);
  return out;
}

Value decode_value(std::string_view text) { return value_from_json(parse_json(text), "$"); }

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Hello:
      return "hello";
    case Op::Call:
      return "call";
    case Op::Construct:
      return "construct";
    case Op::ModuleTest:
      return "module_test";
    case Op::Reset:
      return "reset";
    case Op::Shutdown:
      return "shutdown";
  }
  return "hello";
}

std::optional<Op> op_from_name(std::string_view name) {
  for (Op op : {Op::Hello, Op::Call, Op::Construct, Op::ModuleTest, Op::Reset, Op::Shutdown}) {
    if (op_name(op) == name) return op;
  }
  return std::nullopt;
}

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Ok:
      return "ok";
    case Status::Crash:
      return "crash";
    case Status::Timeout:
      return "timeout";
    case Status::Invalid:
      return "invalid";
  }
  return "ok";
}

std::optional<Status> status_from_name(std::string_view name) {
  for (Status s : {Status::Ok, Status::Crash, Status::Timeout, Status::Invalid}) {
    if (status_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string encode_request(const Request& r) {
  std::string out = R"({"id":)" + std::to_string(r.id) + R"(,"op":)" + json_string(op_name(r.op));
  if (r.target) out += R"(,"target":)" + json_string(*r.target);
  out += R"(,"args":)";
  encode_items(out, r.args);
  if (r.kwargs) out += R"(,"kwargs":)" + encode_value(*r.kwargs);
  if (r.timeout_ms) out += R"(,"timeout_ms":)" + std::to_string(*r.timeout_ms);
  return out + "}";
}

std::string encode_response(const Response& r) {
  std::string out =
      R"({"id":)" + std::to_string(r.id) + R"(,"status":)" + json_string(status_name(r.status));
  if (r.value) out += R"(,"value":)" + encode_value(*r.value);
  if (r.exc_type) out += R"(,"exc_type":)" + json_string(*r.exc_type);
  if (r.message) out += R"(,"message":)" + json_string(*r.message);
  if (r.location) out += R"(,"location":)" + json_string(*r.location);
  if (r.frames) {
    out += R"(,"frames":[)";
    for (std::size_t i = 0; i < r.frames->size(); ++i) {
      if (i) out += ',';
      out += json_string((*r.frames)[i]);
    }
    out += ']';
  }
  return out + "}";
}

Request decode_request(std::string_view line) {
  const json j = object_line(line);
  Request r;
  r.id = as_nat(field(j, "id"), "$.id");
  const json& op = field(j, "op");
  std::optional<Op> tag;
  if (op.is_string()) tag = op_from_name(op.get<std::string>());
  if (!tag) bad("$.op", "unknown op");
  r.op = *tag;
  r.target = optional_string(j, "target");
  if ((r.op == Op::Call || r.op == Op::Construct || r.op == Op::ModuleTest) && !r.target) {
    bad("$.target", "op requires a target");
  }
  if (j.contains("args")) r.args = items_from_json(j["args"], "$.args");
  if (j.contains("kwargs") && !j["kwargs"].is_null()) {
    Value kw = value_from_json(j["kwargs"], "$.kwargs");
    if (kw.kind() != Value::Kind::Dict) bad("$.kwargs", "expected an encoded dict");
    for (const auto& [k, v] : kw.as_dict().entries) {
      if (k.kind() != Value::Kind::Str) bad("$.kwargs", "keyword names must be strings");
    }
    r.kwargs = std::move(kw);
  }
  if (j.contains("timeout_ms") && !j["timeout_ms"].is_null()) {
    r.timeout_ms = as_nat(j["timeout_ms"], "$.timeout_ms");
  }
  return r;
}

Response decode_response(std::string_view line) {
  const json j = object_line(line);
  Response r;
  r.id = as_nat(field(j, "id"), "$.id");
  const json& st = field(j, "status");
  std::optional<Status> tag;
  if (st.is_string()) tag = status_from_name(st.get<std::string>());
  if (!tag) bad("$.status", "unknown status");
  r.status = *tag;
  if (j.contains("value") && !(j["value"].is_null() && r.status != Status::Ok)) {
    r.value = value_from_json(j["value"], "$.value");
  }
  r.exc_type = optional_string(j, "exc_type");
  r.message = optional_string(j, "message");
  r.location = optional_string(j, "location");
  if (j.contains("frames") && !j["frames"].is_null()) {
    const json& fr = j["frames"];
    if (!fr.is_array()) bad("$.frames", "expected an array of strings");
    std::vector<std::string> frames;
    for (const auto& f : fr) {
      if (!f.is_string()) bad("$.frames", "expected an array of strings");
      frames.push_back(f.get<std::string>());
    }
    r.frames = std::move(frames);
  }
  if (r.status == Status::Crash &&
      (!r.exc_type || r.exc_type->empty() || !r.location || r.location->empty())) {
    bad("$", "crash response needs exc_type and location");
  }
  return r;
}

}  // namespace ancheck
