#pragma once

// Dynamic runtime values exchanged with a subject program.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ancheck {

enum class DType : std::uint8_t {
  Bool,
  Int8,
  Int16,
  Int32,
  Int64,
  UInt8,
  UInt16,
  UInt32,
  UInt64,
  Float32,
  Float64,
};

inline constexpr DType kAllDTypes[] = {
    DType::Bool,   DType::Int8,   DType::Int16,   DType::Int32,
    DType::Int64,  DType::UInt8,  DType::UInt16,  DType::UInt32,
    DType::UInt64, DType::Float32, DType::Float64,
};

std::string_view dtype_name(DType t);
std::optional<DType> dtype_from_name(std::string_view name);

bool dtype_is_float(DType t);
bool dtype_is_unsigned(DType t);
bool dtype_is_signed_int(DType t);

// Closed integer range of an integer dtype, clipped to what an Int value can
// hold (uint64 tops out at INT64_MAX here).
std::pair<std::int64_t, std::int64_t> dtype_int_range(DType t);

class Value;

struct ListValue {
  std::vector<Value> items;
};

struct TupleValue {
  std::vector<Value> items;
};

// Insertion-ordered key/value pairs; keys distinct under structural_eq.
struct DictValue {
  std::vector<std::pair<Value, Value>> entries;
};

// Dense row-major array. product(shape) == data.size().
struct NdArrayValue {
  DType dtype = DType::Float64;
  std::vector<std::size_t> shape;
  std::vector<Value> data;
};

// Opaque reference into the worker's handle table.
struct HandleValue {
  std::uint64_t id = 0;
  std::string gen;
};

class Value {
 public:
  enum class Kind : std::uint8_t {
    None,
    Bool,
    Int,
    Float,
    Str,
    List,
    Tuple,
    Dict,
    NdArray,
    Handle,
  };

  using Storage = std::variant<std::monostate, bool, std::int64_t, double,
                               std::string, ListValue, TupleValue, DictValue,
                               NdArrayValue, HandleValue>;

  Value() = default;

  static Value none() { return Value(); }
  static Value boolean(bool b) { return Value(Storage(b)); }
  static Value integer(std::int64_t i) { return Value(Storage(i)); }
  static Value real(double d) { return Value(Storage(d)); }
  static Value str(std::string s) { return Value(Storage(std::move(s))); }
  static Value list(std::vector<Value> items) {
    return Value(Storage(ListValue{std::move(items)}));
  }
  static Value tuple(std::vector<Value> items) {
    return Value(Storage(TupleValue{std::move(items)}));
  }
  static Value dict(std::vector<std::pair<Value, Value>> entries) {
    return Value(Storage(DictValue{std::move(entries)}));
  }
  static Value ndarray(DType dtype, std::vector<std::size_t> shape,
                       std::vector<Value> data) {
    return Value(Storage(
        NdArrayValue{dtype, std::move(shape), std::move(data)}));
  }
  static Value handle(std::uint64_t id, std::string gen) {
    return Value(Storage(HandleValue{id, std::move(gen)}));
  }

  Kind kind() const { return static_cast<Kind>(storage_.index()); }
  const Storage& storage() const { return storage_; }
  Storage& storage() { return storage_; }

  bool is_none() const { return kind() == Kind::None; }
  bool is_numeric() const {
    return kind() == Kind::Int || kind() == Kind::Float;
  }

  bool as_bool() const { return std::get<bool>(storage_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(storage_); }
  double as_float() const { return std::get<double>(storage_); }
  const std::string& as_str() const { return std::get<std::string>(storage_); }
  const ListValue& as_list() const { return std::get<ListValue>(storage_); }
  const TupleValue& as_tuple() const { return std::get<TupleValue>(storage_); }
  const DictValue& as_dict() const { return std::get<DictValue>(storage_); }
  const NdArrayValue& as_ndarray() const {
    return std::get<NdArrayValue>(storage_);
  }
  const HandleValue& as_handle() const {
    return std::get<HandleValue>(storage_);
  }

  // Items of a List or Tuple.
  const std::vector<Value>& sequence_items() const;

  friend bool operator==(const Value& a, const Value& b);

 private:
  explicit Value(Storage s) : storage_(std::move(s)) {}

  Storage storage_;
};

// Argument name -> value, in declaration order.
using Binding = std::vector<std::pair<std::string, Value>>;

// Deep equality. Int 0 and Float 0.0 differ; NaN equals NaN; -0.0 differs
// from 0.0 so that equality stays a faithful identity for encoding.
bool structural_eq(const Value& a, const Value& b);

std::string_view kind_name(Value::Kind k);

// Number of scalar leaves in a value; a None or Handle counts as one.
std::size_t element_count(const Value& v);

// Whether a scalar conforms to a dtype: bool values for Bool, Int values in
// range for integer dtypes, Float values for float dtypes (float32 ones must
// be exactly representable).
bool dtype_admits(DType t, const Value& v);

bool is_float32_representable(double d);

// Checks the NdArray, Dict-key and nesting invariants of a value.
bool well_formed(const Value& v);

}  // namespace ancheck
