#pragma once

// Splittable deterministic random streams.

#include <cstdint>
#include <utility>

namespace ancheck {

// SplitMix64 with per-stream gammas, bit-compatible with Java's
// SplittableRandom. Integer ranges use rejection sampling so results do not
// depend on the standard library's distributions.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

  explicit SplitMix64(std::uint64_t seed, std::uint64_t gamma = kGoldenGamma)
      : seed_(seed), gamma_(gamma) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits.
  double next_double();
  // Uniform in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);
  // Uniform in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool chance(double p);

  // Derives an independent child stream; advances this one.
  SplitMix64 split();

  bool operator==(const SplitMix64&) const = default;

 private:
  std::uint64_t seed_;
  std::uint64_t gamma_;
};

std::uint64_t mix64(std::uint64_t z);

struct GenConfig {
  double boundary_bias = 0.25;
  std::uint64_t size_budget = 10000;  // scalar leaves per generated argument tuple
  std::int64_t int_window = 1000000;  // half-width for unbounded ints
  double float_window = 1e6;          // half-width for unbounded floats
  std::int64_t unsigned_elem_max = 255;
  std::int64_t signed_elem_min = -100;
  std::int64_t signed_elem_max = 100;
  double float_elem_min = -1.0;
  double float_elem_max = 1.0;
  // Chance of drawing NaN / an infinity when a float constraint allows it.
  double special_float_chance = 0.05;
  unsigned max_depth = 32;  // nesting through objs/gen calls

  bool operator==(const GenConfig&) const = default;
};

struct GenContext {
  std::uint64_t seed;
  SplitMix64 rng;
  GenConfig config;
  std::uint64_t budget_used = 0;

  explicit GenContext(std::uint64_t seed_, GenConfig cfg = {})
      : seed(seed_), rng(seed_), config(cfg) {}
};

// Pure: the argument is untouched. The first result continues the parent
// stream, the second is a fresh child.
std::pair<GenContext, GenContext> split(const GenContext& ctx);

}  // namespace ancheck
