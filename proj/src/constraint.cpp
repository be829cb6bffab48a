#include "ancheck/constraint.hpp"

#include <cfloat>
#include <cmath>
#include <limits>

namespace ancheck {

namespace {

// Saturating a + b for the sugar defaults.
std::int64_t sat_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    return b > 0 ? std::numeric_limits<std::int64_t>::max()
                 : std::numeric_limits<std::int64_t>::min();
  }
  return out;
}

bool is_literal_item(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::None:
    case Value::Kind::Bool:
    case Value::Kind::Int:
    case Value::Kind::Float:
    case Value::Kind::Str:
      return true;
    case Value::Kind::List:
    case Value::Kind::Tuple:
      for (const auto& item : v.sequence_items()) {
        if (!is_literal_item(item)) return false;
      }
      return true;
    default:
      return false;
  }
}

// Whether every value of c can serve as a dict key (scalar, string or tuple).
bool yields_hashable(const Constraint& c) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Froms>) {
          for (const auto& item : n.items) {
            if (std::holds_alternative<GenCall>(item)) return false;
            const auto& v = std::get<Value>(item);
            if (v.kind() == Value::Kind::List) return false;
            if (v.kind() == Value::Kind::Tuple) {
              for (const auto& x : v.as_tuple().items) {
                if (x.kind() == Value::Kind::List) return false;
              }
            }
          }
          return true;
        } else if constexpr (std::is_same_v<T, Bools> || std::is_same_v<T, Ints> ||
                             std::is_same_v<T, Floats> ||
                             std::is_same_v<T, NpShapes>) {
          return true;
        } else if constexpr (std::is_same_v<T, Tuples>) {
          for (const auto& comp : n.components) {
            if (!yields_hashable(comp)) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, Anys>) {
          for (const auto& alt : n.alternatives) {
            if (!yields_hashable(alt)) return false;
          }
          return true;
        } else {
          return false;
        }
      },
      c.node);
}

class Validator {
 public:
  std::vector<std::string> violations;

  void check(const Constraint& c, const std::string& path) {
    std::visit([&](const auto& n) { visit(n, path); }, c.node);
  }

 private:
  void fail(const std::string& path, const std::string& msg) {
    violations.push_back(path + ": " + msg);
  }

  void visit(const Froms& n, const std::string& path) {
    if (n.items.empty()) fail(path, "empty froms constraint");
    for (std::size_t i = 0; i < n.items.size(); ++i) {
      const auto item_path = path + "[" + std::to_string(i) + "]";
      if (const auto* call = std::get_if<GenCall>(&n.items[i])) {
        if (call->name.empty()) fail(item_path, "empty generator name");
        for (const auto& arg : call->args) {
          if (!is_literal_item(arg)) fail(item_path, "generator argument is not a literal");
        }
        continue;
      }
      const auto& v = std::get<Value>(n.items[i]);
      if (!is_literal_item(v)) fail(item_path, "froms item is not a literal");
      for (std::size_t j = 0; j < i; ++j) {
        if (n.items[i] == n.items[j]) {
          fail(item_path, "duplicate froms item");
          break;
        }
      }
    }
  }

  void visit(const Bools&, const std::string&) {}

  void visit(const Ints& n, const std::string& path) {
    if (n.min && n.max && *n.min > *n.max) fail(path, "min > max");
  }

  void visit(const Floats& n, const std::string& path) {
    bool bounds_ok = true;
    for (const auto& bound : {n.min, n.max}) {
      if (bound && !std::isfinite(*bound)) {
        fail(path, "float bound must be finite");
        bounds_ok = false;
      }
    }
    if (n.width != 32 && n.width != 64) fail(path, "width must be 32 or 64");
    if (!bounds_ok) return;
    if (n.min && n.max && *n.min > *n.max) {
      fail(path, "min > max");
      return;
    }
    if (n.min && n.max && *n.min == *n.max && n.exclude_min && n.exclude_max) {
      fail(path, "open interval with min == max is empty");
      return;
    }
    if ((n.width == 32 || n.width == 64) && !float_window(n, DBL_MAX)) {
      fail(path, "empty float range");
    }
  }

  void visit(const Lists& n, const std::string& path) {
    if (n.min_len > n.max_len) fail(path, "min_len > max_len");
    check(*n.elem, path + ".elem");
  }

  void visit(const IntLists& n, const std::string& path) {
    if (n.min_len > n.effective_max_len()) fail(path, "min_len > max_len");
    if (n.min > n.effective_max()) fail(path, "min > max");
  }

  void visit(const Tuples& n, const std::string& path) {
    if (n.components.empty()) fail(path, "empty tuple constraint");
    for (std::size_t i = 0; i < n.components.size(); ++i) {
      check(n.components[i], path + "[" + std::to_string(i) + "]");
    }
  }

  void visit(const NpShapes& n, const std::string& path) {
    if (n.min_dims < 1) fail(path, "min_dims must be at least 1");
    if (n.min_dims > n.max_dims) fail(path, "min_dims > max_dims");
    if (n.min_side < 1) fail(path, "min_side must be at least 1");
    if (n.min_side > n.max_side) fail(path, "min_side > max_side");
  }

  void visit(const NpArrays& n, const std::string& path) {
    if (const auto* literal = std::get_if<std::vector<std::size_t>>(&n.shape)) {
      if (literal->empty()) fail(path + ".shape", "shape must have at least one dimension");
      for (auto side : *literal) {
        if (side < 1) {
          fail(path + ".shape", "shape sides must be positive");
          break;
        }
      }
    } else {
      visit(std::get<NpShapes>(n.shape), path + ".shape");
    }
  }

  void visit(const Dicts& n, const std::string& path) {
    if (n.min_size > n.max_size) fail(path, "min_size > max_size");
    if (!yields_hashable(*n.keys)) {
      fail(path + ".keys", "dict keys must be scalars, strings or tuples");
    } else if (auto card = cardinality_bound(*n.keys); card && *card < n.min_size) {
      fail(path + ".keys", "key space smaller than min_size");
    }
    check(*n.keys, path + ".keys");
    check(*n.values, path + ".values");
  }

  void visit(const Anys& n, const std::string& path) {
    if (n.alternatives.empty()) fail(path, "empty anys constraint");
    for (std::size_t i = 0; i < n.alternatives.size(); ++i) {
      check(n.alternatives[i], path + "|" + std::to_string(i));
    }
  }

  void visit(const Objs& n, const std::string& path) {
    if (n.gen.empty()) fail(path, "empty generator name");
  }
};

bool in_float_bounds(double d, const Floats& f) {
  if (f.min) {
    if (f.exclude_min ? !(d > *f.min) : !(d >= *f.min)) return false;
  }
  if (f.max) {
    if (f.exclude_max ? !(d < *f.max) : !(d <= *f.max)) return false;
  }
  return true;
}

bool shape_satisfies(const std::vector<std::size_t>& shape, const NpShapes& s) {
  if (shape.size() < s.min_dims || shape.size() > s.max_dims) return false;
  for (auto side : shape) {
    if (side < s.min_side || side > s.max_side) return false;
  }
  return true;
}

struct Satisfier {
  const Value& v;

  bool operator()(const Froms& n) const {
    for (const auto& item : n.items) {
      if (const auto* call = std::get_if<GenCall>(&item)) {
        if (v.kind() == Value::Kind::Handle && v.as_handle().gen == call->name) {
          return true;
        }
      } else if (structural_eq(v, std::get<Value>(item))) {
        return true;
      }
    }
    return false;
  }

  bool operator()(const Bools&) const { return v.kind() == Value::Kind::Bool; }

  bool operator()(const Ints& n) const {
    if (v.kind() != Value::Kind::Int) return false;
    const auto i = v.as_int();
    return (!n.min || i >= *n.min) && (!n.max || i <= *n.max);
  }

  bool operator()(const Floats& n) const {
    if (v.kind() != Value::Kind::Float) return false;
    const double d = v.as_float();
    if (std::isnan(d)) return n.allow_nan;
    if (std::isinf(d) && !n.allow_inf) return false;
    if (n.width == 32 && !is_float32_representable(d)) return false;
    return in_float_bounds(d, n);
  }

  bool operator()(const Lists& n) const {
    if (v.kind() != Value::Kind::List) return false;
    const auto& items = v.as_list().items;
    if (items.size() < n.min_len || items.size() > n.max_len) return false;
    for (const auto& item : items) {
      if (!satisfies(item, *n.elem)) return false;
    }
    return true;
  }

  bool operator()(const IntLists& n) const {
    if (v.kind() != Value::Kind::List) return false;
    const auto& items = v.as_list().items;
    if (items.size() < n.min_len || items.size() > n.effective_max_len()) {
      return false;
    }
    const auto hi = n.effective_max();
    for (const auto& item : items) {
      if (item.kind() != Value::Kind::Int) return false;
      if (item.as_int() < n.min || item.as_int() > hi) return false;
    }
    return true;
  }

  bool operator()(const Tuples& n) const {
    if (v.kind() != Value::Kind::Tuple) return false;
    const auto& items = v.as_tuple().items;
    if (items.size() != n.components.size()) return false;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!satisfies(items[i], n.components[i])) return false;
    }
    return true;
  }

  bool operator()(const NpShapes& n) const {
    if (v.kind() != Value::Kind::Tuple) return false;
    std::vector<std::size_t> shape;
    for (const auto& item : v.as_tuple().items) {
      if (item.kind() != Value::Kind::Int || item.as_int() < 1) return false;
      shape.push_back(static_cast<std::size_t>(item.as_int()));
    }
    return shape_satisfies(shape, n);
  }

  bool operator()(const NpArrays& n) const {
    if (v.kind() != Value::Kind::NdArray) return false;
    const auto& nd = v.as_ndarray();
    if (nd.dtype != n.dtype || !well_formed(v)) return false;
    if (const auto* literal = std::get_if<std::vector<std::size_t>>(&n.shape)) {
      return nd.shape == *literal;
    }
    return shape_satisfies(nd.shape, std::get<NpShapes>(n.shape));
  }

  bool operator()(const Dicts& n) const {
    if (v.kind() != Value::Kind::Dict || !well_formed(v)) return false;
    const auto& entries = v.as_dict().entries;
    if (entries.size() < n.min_size || entries.size() > n.max_size) return false;
    for (const auto& [key, val] : entries) {
      if (!satisfies(key, *n.keys) || !satisfies(val, *n.values)) return false;
    }
    return true;
  }

  bool operator()(const Anys& n) const {
    for (const auto& alt : n.alternatives) {
      if (satisfies(v, alt)) return true;
    }
    return false;
  }

  bool operator()(const Objs& n) const {
    return v.kind() == Value::Kind::Handle && v.as_handle().gen == n.gen;
  }
};

double next_up(double d) { return std::nextafter(d, INFINITY); }
double next_down(double d) { return std::nextafter(d, -INFINITY); }

std::optional<std::uint64_t> mul_bound(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) return std::nullopt;
  return out;
}

}  // namespace

std::int64_t IntLists::effective_max() const {
  return max.value_or(sat_add(min, 5));
}

bool Tuples::operator==(const Tuples& other) const {
  return components == other.components;
}

bool Anys::operator==(const Anys& other) const {
  return alternatives == other.alternatives;
}

std::string_view form_name(const Constraint& c) {
  static constexpr std::string_view kNames[] = {
      "froms",     "bools",     "ints",      "floats", "lists", "int_lists",
      "tuples",    "np_shapes", "np_arrays", "dicts",  "anys",  "objs",
  };
  return kNames[c.node.index()];
}

std::vector<std::string> validate(const Constraint& c) {
  Validator v;
  v.check(c, "$");
  return std::move(v.violations);
}

bool satisfies(const Value& v, const Constraint& c) {
  return std::visit(Satisfier{v}, c.node);
}

void collect_generator_refs(const Constraint& c, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Froms>) {
          for (const auto& item : n.items) {
            if (const auto* call = std::get_if<GenCall>(&item)) out.push_back(call->name);
          }
        } else if constexpr (std::is_same_v<T, Lists>) {
          collect_generator_refs(*n.elem, out);
        } else if constexpr (std::is_same_v<T, Tuples>) {
          for (const auto& comp : n.components) collect_generator_refs(comp, out);
        } else if constexpr (std::is_same_v<T, Dicts>) {
          collect_generator_refs(*n.keys, out);
          collect_generator_refs(*n.values, out);
        } else if constexpr (std::is_same_v<T, Anys>) {
          for (const auto& alt : n.alternatives) collect_generator_refs(alt, out);
        } else if constexpr (std::is_same_v<T, Objs>) {
          out.push_back(n.gen);
        }
      },
      c.node);
}

std::optional<FloatWindow> float_window(const Floats& f, double unbounded_span) {
  double lo = f.min ? *f.min : -unbounded_span;
  double hi = f.max ? *f.max : unbounded_span;
  if (f.min && f.exclude_min) lo = next_up(lo);
  if (f.max && f.exclude_max) hi = next_down(hi);
  if (f.width == 32) {
    const double fmax = static_cast<double>(FLT_MAX);
    if (lo > fmax || hi < -fmax) return std::nullopt;
    lo = std::max(lo, -fmax);
    hi = std::min(hi, fmax);
    auto lo32 = static_cast<float>(lo);
    if (static_cast<double>(lo32) < lo) lo32 = std::nextafter(lo32, INFINITY);
    auto hi32 = static_cast<float>(hi);
    if (static_cast<double>(hi32) > hi) hi32 = std::nextafter(hi32, -INFINITY);
    lo = lo32;
    hi = hi32;
  }
  if (!(lo <= hi)) return std::nullopt;
  return FloatWindow{lo, hi};
}

std::optional<std::uint64_t> cardinality_bound(const Constraint& c) {
  return std::visit(
      [](const auto& n) -> std::optional<std::uint64_t> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Froms>) {
          return n.items.size();
        } else if constexpr (std::is_same_v<T, Bools>) {
          return 2;
        } else if constexpr (std::is_same_v<T, Ints>) {
          if (!n.min || !n.max || *n.min > *n.max) return std::nullopt;
          const auto span = static_cast<std::uint64_t>(*n.max) -
                            static_cast<std::uint64_t>(*n.min);
          if (span == std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
          return span + 1;
        } else if constexpr (std::is_same_v<T, Tuples>) {
          std::uint64_t total = 1;
          for (const auto& comp : n.components) {
            auto card = cardinality_bound(comp);
            if (!card) return std::nullopt;
            auto next = mul_bound(total, *card);
            if (!next) return std::nullopt;
            total = *next;
          }
          return total;
        } else if constexpr (std::is_same_v<T, Anys>) {
          std::uint64_t total = 0;
          for (const auto& alt : n.alternatives) {
            auto card = cardinality_bound(alt);
            if (!card || __builtin_add_overflow(total, *card, &total)) {
              return std::nullopt;
            }
          }
          return total;
        } else {
          return std::nullopt;
        }
      },
      c.node);
}

}  // namespace ancheck
