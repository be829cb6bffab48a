#include "fuzz.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "ancheck/require.hpp"
#include "ancheck/spec.hpp"

namespace ancheck::fuzz {

namespace {

std::int64_t any_int(SplitMix64& rng) {
  switch (rng.below(5)) {
    case 0: return std::numeric_limits<std::int64_t>::min();
    case 1: return std::numeric_limits<std::int64_t>::max();
    case 2: return static_cast<std::int64_t>(rng.next_u64());
    default: return rng.uniform_int(-1000, 1000);
  }
}

double any_double(SplitMix64& rng) {
  switch (rng.below(9)) {
    case 0: return std::numeric_limits<double>::quiet_NaN();
    case 1: return rng.chance(0.5) ? INFINITY : -INFINITY;
    case 2: return -0.0;
    case 3: return std::numeric_limits<double>::denorm_min() * static_cast<double>(rng.below(100) + 1);
    case 4: {
      double d;
      std::uint64_t bits = rng.next_u64();
      std::memcpy(&d, &bits, sizeof d);
      return std::isnan(d) ? 0.5 : d;
    }
    case 5: return static_cast<double>(rng.uniform_int(-100, 100));
    default: return (rng.next_double() - 0.5) * std::pow(10.0, rng.uniform_int(-8, 8));
  }
}

std::string any_string(SplitMix64& rng) {
  static const char* const pieces[] = {"a", "Z", "0", " ", "\"", "\\", "\n", "\t", "\x01",
                                       "é", "✓", "𝄞", "{", "$t", "}", ",", "'"};
  std::string s;
  const auto n = rng.below(8);
  for (std::uint64_t i = 0; i < n; ++i) s += pieces[rng.below(std::size(pieces))];
  return s;
}

Value scalar(SplitMix64& rng) {
  switch (rng.below(5)) {
    case 0: return Value::none();
    case 1: return Value::boolean(rng.chance(0.5));
    case 2: return Value::integer(any_int(rng));
    case 3: return Value::real(any_double(rng));
    default: return Value::str(any_string(rng));
  }
}

Value hashable(SplitMix64& rng, int depth) {
  if (depth > 0 && rng.chance(0.2)) {
    std::vector<Value> items;
    const auto n = rng.below(3);
    for (std::uint64_t i = 0; i < n; ++i) items.push_back(hashable(rng, depth - 1));
    return Value::tuple(std::move(items));
  }
  return scalar(rng);
}

Value dtype_element(SplitMix64& rng, DType t) {
  if (t == DType::Bool) return Value::boolean(rng.chance(0.5));
  if (dtype_is_float(t)) {
    double d = any_double(rng);
    if (t == DType::Float32) {
      const float f = static_cast<float>(d);
      d = std::isfinite(d) && !std::isfinite(f) ? 1.5 : static_cast<double>(f);
    }
    return Value::real(d);
  }
  const auto [lo, hi] = dtype_int_range(t);
  if (rng.chance(0.3)) return Value::integer(rng.chance(0.5) ? lo : hi);
  return Value::integer(rng.uniform_int(std::max<std::int64_t>(lo, -300),
                                        std::min<std::int64_t>(hi, 300)));
}

}  // namespace

Value random_value(SplitMix64& rng, int depth) {
  const auto pick = rng.below(depth > 0 ? 10 : 6);
  switch (pick) {
    case 0: case 1: case 2: case 3: case 4: return scalar(rng);
    case 5: return Value::handle(rng.below(1000), "");
    case 6: case 7: {
      std::vector<Value> items;
      const auto n = rng.below(4);
      for (std::uint64_t i = 0; i < n; ++i) items.push_back(random_value(rng, depth - 1));
      return pick == 6 ? Value::list(std::move(items)) : Value::tuple(std::move(items));
    }
    case 8: {
      std::vector<std::pair<Value, Value>> entries;
      const auto n = rng.below(4);
      for (std::uint64_t i = 0; i < n; ++i) {
        Value k = hashable(rng, 1);
        bool dup = false;
        for (const auto& e : entries) dup = dup || structural_eq(e.first, k);
        if (!dup) entries.emplace_back(std::move(k), random_value(rng, depth - 1));
      }
      return Value::dict(std::move(entries));
    }
    default: {
      const DType t = kAllDTypes[rng.below(std::size(kAllDTypes))];
      std::vector<std::size_t> shape;
      std::size_t count = 1;
      const auto dims = rng.below(4);
      for (std::uint64_t i = 0; i < dims; ++i) {
        shape.push_back(rng.below(4));
        count *= shape.back();
      }
      std::vector<Value> data;
      for (std::size_t i = 0; i < count; ++i) data.push_back(dtype_element(rng, t));
      return Value::ndarray(t, std::move(shape), std::move(data));
    }
  }
}

namespace {

Value literal_item(SplitMix64& rng, std::size_t salt) {
  switch (rng.below(4)) {
    case 0: return Value::integer(static_cast<std::int64_t>(salt) * 7 - 3);
    case 1: return Value::str("s" + std::to_string(salt));
    case 2: return Value::real(static_cast<double>(salt) + 0.25);
    default:
      return Value::tuple({Value::integer(static_cast<std::int64_t>(salt)), Value::none()});
  }
}

Ints random_ints(SplitMix64& rng) {
  Ints c;
  const std::int64_t a = rng.chance(0.1) ? any_int(rng) : rng.uniform_int(-200, 200);
  const std::int64_t b = rng.chance(0.1) ? any_int(rng) : rng.uniform_int(-200, 200);
  if (rng.chance(0.8)) c.min = std::min(a, b);
  if (rng.chance(0.8)) c.max = std::max(a, b);
  return c;
}

Floats random_floats(SplitMix64& rng) {
  Floats f;
  f.width = rng.chance(0.3) ? 32 : 64;
  auto bound = [&] {
    double d = (rng.next_double() - 0.5) * std::pow(10.0, rng.uniform_int(-3, 6));
    return f.width == 32 ? static_cast<double>(static_cast<float>(d)) : d;
  };
  double a = bound();
  double b = bound();
  if (a > b) std::swap(a, b);
  if (a == b) b = a + 1;
  if (rng.chance(0.8)) f.min = a;
  if (rng.chance(0.8)) f.max = b;
  f.exclude_min = f.min && rng.chance(0.3);
  f.exclude_max = f.max && rng.chance(0.3);
  f.allow_nan = rng.chance(0.3);
  f.allow_inf = (!f.min || !f.max) && rng.chance(0.5);
  return f;
}

NpShapes random_shapes(SplitMix64& rng) {
  NpShapes s;
  s.min_dims = 1 + rng.below(2);
  s.max_dims = s.min_dims + rng.below(2);
  s.min_side = 1 + rng.below(3);
  s.max_side = s.min_side + rng.below(3);
  return s;
}

}  // namespace

Constraint random_constraint(SplitMix64& rng, const std::vector<std::string>& gens, int depth) {
  const std::uint64_t forms = gens.empty() ? 11 : 12;
  const std::uint64_t form = depth > 0 ? rng.below(forms) : rng.below(4);
  switch (form) {
    case 0: {
      Froms f;
      const auto n = 1 + rng.below(4);
      for (std::uint64_t i = 0; i < n; ++i) f.items.push_back(literal_item(rng, i));
      if (!gens.empty() && rng.chance(0.3)) {
        f.items.push_back(GenCall{gens[rng.below(gens.size())], {Value::integer(1)}});
      }
      return f;
    }
    case 1: return Bools{};
    case 2: return random_ints(rng);
    case 3: return random_floats(rng);
    case 4: {
      Lists l{random_constraint(rng, gens, depth - 1), rng.below(3), 0};
      l.max_len = l.min_len + rng.below(3);
      return l;
    }
    case 5: {
      IntLists l;
      l.min_len = rng.below(3);
      if (rng.chance(0.5)) l.max_len = l.min_len + rng.below(4);
      l.min = rng.uniform_int(-10, 10);
      if (rng.chance(0.5)) l.max = l.min + rng.uniform_int(0, 20);
      return l;
    }
    case 6: {
      Tuples t;
      const auto n = 1 + rng.below(3);
      for (std::uint64_t i = 0; i < n; ++i) t.components.push_back(random_constraint(rng, gens, depth - 1));
      return t;
    }
    case 7: return random_shapes(rng);
    case 8: {
      NpArrays a;
      a.dtype = kAllDTypes[rng.below(std::size(kAllDTypes))];
      if (rng.chance(0.5)) {
        a.shape = std::vector<std::size_t>{1 + rng.below(3), 1 + rng.below(3)};
      } else {
        a.shape = random_shapes(rng);
      }
      return a;
    }
    case 9: {
      Ints keys;
      keys.min = 0;
      keys.max = 1000;
      Dicts d{Constraint(keys), random_constraint(rng, gens, depth - 1), rng.below(3), 0};
      d.max_size = d.min_size + rng.below(3);
      return d;
    }
    case 10: {
      Anys a;
      const auto n = 1 + rng.below(3);
      for (std::uint64_t i = 0; i < n; ++i) a.alternatives.push_back(random_constraint(rng, gens, depth - 1));
      return a;
    }
    default: return Objs{gens[rng.below(gens.size())]};
  }
}

namespace {

std::string random_require(SplitMix64& rng, const std::vector<std::string>& names, int depth) {
  const std::string& a = names[rng.below(names.size())];
  if (depth <= 0 || rng.chance(0.4)) {
    static const char* const cmp[] = {"==", "!=", "<", "<=", ">", ">="};
    switch (rng.below(5)) {
      case 0: return a + " " + cmp[rng.below(6)] + " " + std::to_string(rng.uniform_int(-9, 9));
      case 1: return "type_of(" + a + ") == \"int\"";
      case 2: return "len(" + a + ") >= 1";
      case 3: return "(" + a + " + 1) * 2 % 3 != -1.5";
      default: return rng.chance(0.5) ? "true" : "false";
    }
  }
  switch (rng.below(3)) {
    case 0: return random_require(rng, names, depth - 1) + " and " + random_require(rng, names, depth - 1);
    case 1: return random_require(rng, names, depth - 1) + " or " + random_require(rng, names, depth - 1);
    default: return "not (" + random_require(rng, names, depth - 1) + ")";
  }
}

std::string block_body(SplitMix64& rng, const std::vector<std::string>& gens, bool is_gen) {
  std::string out;
  if (is_gen) out += "  @generator\n";
  std::vector<std::string> names;
  const auto n = rng.below(4);
  for (std::uint64_t i = 0; i < n; ++i) {
    names.push_back("a" + std::to_string(i));
    out += "  @arg(" + names.back() + "): " + render_constraint(random_constraint(rng, gens)) + "\n";
  }
  if (!names.empty() && rng.chance(0.6)) out += "  @require(" + random_require(rng, names, 2) + ")\n";
  if (rng.chance(0.2)) out += "  @exclude\n";
  if (rng.chance(0.2)) out += "  @timeout(" + std::to_string(1 + rng.below(30)) + ")\n";
  return out;
}

}  // namespace

std::string random_spec_text(SplitMix64& rng) {
  std::string out = "subject \"pkg.mod" + std::to_string(rng.below(10)) + "\"\n\n";
  std::vector<std::string> gens;
  const auto n_gens = rng.below(3);
  for (std::uint64_t i = 0; i < n_gens; ++i) gens.push_back("g" + std::to_string(i));
  for (const auto& g : gens) out += "gen \"" + g + "\":\n" + block_body(rng, gens, true) + "\n";
  const auto n_fns = 1 + rng.below(4);
  for (std::uint64_t i = 0; i < n_fns; ++i) {
    const std::string name = rng.chance(0.3) ? "K.m" + std::to_string(i) : "f" + std::to_string(i);
    out += "fn \"" + name + "\":\n" + block_body(rng, gens, false);
    if (rng.chance(0.2)) {
      out += "  @cc_example([1, \"x\"";
      if (!gens.empty()) out += ", gen " + gens[0] + "(2)";
      out += "])\n";
    }
    out += "\n";
  }
  if (rng.chance(0.5)) out += "module_test \"pkg.main\"\n";
  return out;
}

}  // namespace ancheck::fuzz
