#include "ancheck/value.hpp"

#include <array>
#include <cfloat>
#include <cmath>
#include <limits>

namespace ancheck {

namespace {

constexpr std::array<std::string_view, 11> kDTypeNames = {
    "bool",   "int8",   "int16",  "int32",   "int64",  "uint8",
    "uint16", "uint32", "uint64", "float32", "float64",
};

constexpr std::array<std::string_view, 10> kKindNames = {
    "none", "bool", "int", "float", "str",
    "list", "tuple", "dict", "ndarray", "handle",
};

bool same_float(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return a == b && std::signbit(a) == std::signbit(b);
}

bool seq_eq(const std::vector<Value>& a, const std::vector<Value>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!structural_eq(a[i], b[i])) return false;
  }
  return true;
}

bool is_hashable_key(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::List:
    case Value::Kind::Dict:
    case Value::Kind::NdArray:
      return false;
    case Value::Kind::Tuple:
      for (const auto& item : v.as_tuple().items) {
        if (!is_hashable_key(item)) return false;
      }
      return true;
    default:
      return true;
  }
}

}  // namespace

std::string_view dtype_name(DType t) {
  return kDTypeNames[static_cast<std::size_t>(t)];
}

std::optional<DType> dtype_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kDTypeNames.size(); ++i) {
    if (kDTypeNames[i] == name) return static_cast<DType>(i);
  }
  return std::nullopt;
}

bool dtype_is_float(DType t) {
  return t == DType::Float32 || t == DType::Float64;
}

bool dtype_is_unsigned(DType t) {
  return t == DType::UInt8 || t == DType::UInt16 || t == DType::UInt32 ||
         t == DType::UInt64;
}

bool dtype_is_signed_int(DType t) {
  return t == DType::Int8 || t == DType::Int16 || t == DType::Int32 ||
         t == DType::Int64;
}

std::pair<std::int64_t, std::int64_t> dtype_int_range(DType t) {
  switch (t) {
    case DType::Bool:
      return {0, 1};
    case DType::Int8:
      return {INT8_MIN, INT8_MAX};
    case DType::Int16:
      return {INT16_MIN, INT16_MAX};
    case DType::Int32:
      return {INT32_MIN, INT32_MAX};
    case DType::Int64:
      return {INT64_MIN, INT64_MAX};
    case DType::UInt8:
      return {0, UINT8_MAX};
    case DType::UInt16:
      return {0, UINT16_MAX};
    case DType::UInt32:
      return {0, UINT32_MAX};
    case DType::UInt64:
      return {0, INT64_MAX};
    case DType::Float32:
    case DType::Float64:
      break;
  }
  return {0, 0};
}

const std::vector<Value>& Value::sequence_items() const {
  if (kind() == Kind::Tuple) return as_tuple().items;
  return as_list().items;
}

bool operator==(const Value& a, const Value& b) { return structural_eq(a, b); }

bool structural_eq(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Value::Kind::None:
      return true;
    case Value::Kind::Bool:
      return a.as_bool() == b.as_bool();
    case Value::Kind::Int:
      return a.as_int() == b.as_int();
    case Value::Kind::Float:
      return same_float(a.as_float(), b.as_float());
    case Value::Kind::Str:
      return a.as_str() == b.as_str();
    case Value::Kind::List:
      return seq_eq(a.as_list().items, b.as_list().items);
    case Value::Kind::Tuple:
      return seq_eq(a.as_tuple().items, b.as_tuple().items);
    case Value::Kind::Dict: {
      const auto& x = a.as_dict().entries;
      const auto& y = b.as_dict().entries;
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!structural_eq(x[i].first, y[i].first) ||
            !structural_eq(x[i].second, y[i].second)) {
          return false;
        }
      }
      return true;
    }
    case Value::Kind::NdArray: {
      const auto& x = a.as_ndarray();
      const auto& y = b.as_ndarray();
      return x.dtype == y.dtype && x.shape == y.shape && seq_eq(x.data, y.data);
    }
    case Value::Kind::Handle:
      return a.as_handle().id == b.as_handle().id &&
             a.as_handle().gen == b.as_handle().gen;
  }
  return false;
}

std::string_view kind_name(Value::Kind k) {
  return kKindNames[static_cast<std::size_t>(k)];
}

std::size_t element_count(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::List:
    case Value::Kind::Tuple: {
      std::size_t n = 0;
      for (const auto& item : v.sequence_items()) n += element_count(item);
      return n;
    }
    case Value::Kind::Dict: {
      std::size_t n = 0;
      for (const auto& [k, val] : v.as_dict().entries) {
        n += element_count(k) + element_count(val);
      }
      return n;
    }
    case Value::Kind::NdArray:
      return v.as_ndarray().data.size();
    case Value::Kind::Str:
      return 1;
    default:
      return 1;
  }
}

bool is_float32_representable(double d) {
  if (std::isnan(d) || std::isinf(d)) return true;
  if (std::fabs(d) > static_cast<double>(FLT_MAX)) return false;
  return static_cast<double>(static_cast<float>(d)) == d;
}

bool dtype_admits(DType t, const Value& v) {
  if (t == DType::Bool) return v.kind() == Value::Kind::Bool;
  if (dtype_is_float(t)) {
    if (v.kind() != Value::Kind::Float) return false;
    return t == DType::Float64 || is_float32_representable(v.as_float());
  }
  if (v.kind() != Value::Kind::Int) return false;
  auto [lo, hi] = dtype_int_range(t);
  return v.as_int() >= lo && v.as_int() <= hi;
}

bool well_formed(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::List:
    case Value::Kind::Tuple:
      for (const auto& item : v.sequence_items()) {
        if (!well_formed(item)) return false;
      }
      return true;
    case Value::Kind::Dict: {
      const auto& entries = v.as_dict().entries;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!is_hashable_key(entries[i].first)) return false;
        if (!well_formed(entries[i].first) || !well_formed(entries[i].second)) {
          return false;
        }
        for (std::size_t j = 0; j < i; ++j) {
          if (structural_eq(entries[i].first, entries[j].first)) return false;
        }
      }
      return true;
    }
    case Value::Kind::NdArray: {
      const auto& nd = v.as_ndarray();
      std::size_t product = 1;
      for (auto side : nd.shape) {
        if (side != 0 && product > std::numeric_limits<std::size_t>::max() / side) {
          return false;
        }
        product *= side;
      }
      if (product != nd.data.size()) return false;
      for (const auto& item : nd.data) {
        if (!dtype_admits(nd.dtype, item)) return false;
      }
      return true;
    }
    default:
      return true;
  }
}

}  // namespace ancheck
