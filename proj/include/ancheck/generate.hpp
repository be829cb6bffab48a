#pragma once

// Seeded random generation of constraint-satisfying values.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ancheck/constraint.hpp"
#include "ancheck/random.hpp"
#include "ancheck/spec.hpp"
#include "ancheck/value.hpp"

namespace ancheck {

// Generation gave up on this candidate; the caller discards it.
class GenerationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nested collection sizes went over GenConfig::size_budget.
class BudgetExhausted : public GenerationFailed {
 public:
  BudgetExhausted() : GenerationFailed("size budget exhausted") {}
};

struct NeedsConstruct;

// A generated value whose Handle leaves are placeholders: Handle(i, g) stands
// for the object built by constructs[i]. A draft without constructs is final.
struct Draft {
  Value value;
  std::vector<NeedsConstruct> constructs;
};

// Inputs for building one subject-side object. Generator annotations produce
// named arguments; gen-call literals produce positional ones.
struct NeedsConstruct {
  std::string gen;
  std::vector<Draft> positional;
  std::vector<std::pair<std::string, Draft>> named;
};

using DraftBinding = std::vector<std::pair<std::string, Draft>>;

// Draft values only, handles still placeholders.
Binding draft_values(const DraftBinding& b);

class Generator {
 public:
  // `spec` supplies generator annotations for objs(...); may be null when
  // no constraint references a generator.
  explicit Generator(const AnnotationSpec* spec = nullptr) : spec_(spec) {}

  // Starts a fresh size budget. Throws GenerationFailed.
  Draft generate(const Constraint& c, GenContext& ctx) const;

  // One draft per declared argument, sharing a single size budget.
  DraftBinding generate_args(const FunctionAnnotations& fa, GenContext& ctx) const;

  // Draft for a gen call written as a literal (froms item, cc_example entry).
  NeedsConstruct gen_call(const GenCall& call) const;

 private:
  Value draw(const Constraint& c, GenContext& ctx, std::vector<NeedsConstruct>& sink,
             unsigned depth) const;
  DraftBinding draw_args(const FunctionAnnotations& fa, GenContext& ctx, unsigned depth) const;
  NeedsConstruct draw_objs(const std::string& gen, GenContext& ctx, unsigned depth) const;

  const AnnotationSpec* spec_;
};

// Values a bounded integer draw favours: {lo, lo+1, hi-1, hi, 0} within
// [lo, hi], ascending and distinct.
std::vector<std::int64_t> boundary_points(std::int64_t lo, std::int64_t hi);

// Range an Ints constraint is drawn from once the generation window applies.
std::pair<std::int64_t, std::int64_t> int_draw_range(const Ints& c, std::int64_t window);

}  // namespace ancheck
