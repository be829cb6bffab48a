#pragma once

// Type constraints: trees describing the set of valid values of one argument.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <type_traits>
#include <vector>

#include "ancheck/box.hpp"
#include "ancheck/value.hpp"

namespace ancheck {

// Reference to a generator invoked with literal positional arguments, as in
// `gen grids(3, 6, 6, 3)`.
struct GenCall {
  std::string name;
  std::vector<Value> args;

  bool operator==(const GenCall&) const = default;
};

using LiteralOrGenCall = std::variant<Value, GenCall>;

struct Constraint;

struct Froms {
  std::vector<LiteralOrGenCall> items;
  bool operator==(const Froms&) const = default;
};

struct Bools {
  bool operator==(const Bools&) const = default;
};

struct Ints {
  std::optional<std::int64_t> min;
  std::optional<std::int64_t> max;
  bool operator==(const Ints&) const = default;
};

struct Floats {
  std::optional<double> min;
  std::optional<double> max;
  bool exclude_min = false;
  bool exclude_max = false;
  bool allow_nan = false;
  bool allow_inf = false;
  int width = 64;
  bool operator==(const Floats&) const = default;
};

struct Lists {
  Box<Constraint> elem;
  std::size_t min_len = 0;
  std::size_t max_len = 2;
  bool operator==(const Lists&) const = default;
};

struct IntLists {
  std::size_t min_len = 1;
  std::optional<std::size_t> max_len;
  std::int64_t min = 1;
  std::optional<std::int64_t> max;
  bool operator==(const IntLists&) const = default;

  std::size_t effective_max_len() const { return max_len.value_or(min_len + 2); }
  std::int64_t effective_max() const;
};

struct Tuples {
  std::vector<Constraint> components;
  bool operator==(const Tuples&) const;
};

struct NpShapes {
  std::size_t min_dims = 1;
  std::size_t max_dims = 3;
  std::size_t min_side = 1;
  std::size_t max_side = 10;
  bool operator==(const NpShapes&) const = default;
};

using ShapeSpec = std::variant<std::vector<std::size_t>, NpShapes>;

struct NpArrays {
  DType dtype = DType::Float64;
  ShapeSpec shape = NpShapes{};
  bool operator==(const NpArrays&) const = default;
};

struct Dicts {
  Box<Constraint> keys;
  Box<Constraint> values;
  std::size_t min_size = 0;
  std::size_t max_size = 2;
  bool operator==(const Dicts&) const = default;
};

struct Anys {
  std::vector<Constraint> alternatives;
  bool operator==(const Anys&) const;
};

struct Objs {
  std::string gen;
  bool operator==(const Objs&) const = default;
};

struct Constraint {
  using Node = std::variant<Froms, Bools, Ints, Floats, Lists, IntLists, Tuples,
                            NpShapes, NpArrays, Dicts, Anys, Objs>;
  Node node;

  template <class T>
    requires(!std::is_same_v<std::decay_t<T>, Constraint> && std::is_constructible_v<Node, T &&>)
  Constraint(T&& n) : node(std::forward<T>(n)) {}  // NOLINT

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&node);
  }

  bool operator==(const Constraint& other) const { return node == other.node; }
};

// Names of the twelve constraint forms, in variant order.
std::string_view form_name(const Constraint& c);

// Empty when every invariant holds; otherwise one message per violation, each
// prefixed with the path of the offending node ("$", "$.elem", "$[1]", ...).
std::vector<std::string> validate(const Constraint& c);

// Membership predicate: v belongs to the set of values c denotes.
bool satisfies(const Value& v, const Constraint& c);

// Names of every generator referenced via objs(...) or a gen call, in
// traversal order (may repeat).
void collect_generator_refs(const Constraint& c, std::vector<std::string>& out);

// Resolved numeric window for a float constraint: [lo, hi] after exclusion,
// honouring width. nullopt when no representable value exists.
struct FloatWindow {
  double lo;
  double hi;
};
std::optional<FloatWindow> float_window(const Floats& f, double unbounded_span);

// Upper bound on the number of distinct values a constraint denotes, when one
// is cheaply computable; nullopt means "large or unknown".
std::optional<std::uint64_t> cardinality_bound(const Constraint& c);

}  // namespace ancheck
