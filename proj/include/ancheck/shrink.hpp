#pragma once

// Greedy deterministic minimisation of failing values.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ancheck/constraint.hpp"
#include "ancheck/value.hpp"

namespace ancheck {

enum class ShrinkRationale {
  RemoveChunk,
  HalveTowardBound,
  ComponentShrink,
  SideShrink,
  ElementZero,
};

std::string_view rationale_name(ShrinkRationale r);

struct ShrinkStep {
  Value candidate;  // whole value after the step
  ShrinkRationale rationale;
};

// Ordered lexicographically: scalar leaves, then summed distance of each
// scalar from the point it shrinks toward, then summed froms/anys choice
// indices. Every accepted step lowers it.
struct ShrinkMeasure {
  std::uint64_t elements = 0;
  long double distance = 0;
  std::uint64_t choice = 0;

  auto operator<=>(const ShrinkMeasure&) const = default;
};

ShrinkMeasure shrink_measure(const Value& v, const Constraint& c);

// Point a bounded or unbounded integer shrinks toward: the lower bound when
// present, else 0 clamped into range.
std::int64_t int_shrink_target(const Ints& c);

struct ShrinkStats {
  std::size_t evaluations = 0;
  std::vector<ShrinkStep> accepted;
};

using StillFails = std::function<bool(const Value&)>;

inline constexpr std::size_t kDefaultShrinkBudget = 200;

// `budget` caps calls to still_fails. Returns v0 when nothing smaller fails.
Value shrink(const Value& v0, const Constraint& c, const StillFails& still_fails,
             std::size_t budget = kDefaultShrinkBudget, ShrinkStats* stats = nullptr);

}  // namespace ancheck
