#include "ancheck/random.hpp"

#include <bit>
#include <limits>

namespace ancheck {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::uint64_t mix_gamma(std::uint64_t z) {
  z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
  z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
  z = (z ^ (z >> 33)) | 1ULL;
  const int n = std::popcount(z ^ (z >> 1));
  return n < 24 ? z ^ 0xaaaaaaaaaaaaaaaaULL : z;
}

}  // namespace

std::uint64_t SplitMix64::next_u64() {
  seed_ += gamma_;
  return mix64(seed_);
}

double SplitMix64::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SplitMix64::below(std::uint64_t n) {
  // Reject the short tail so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r <= limit) return r % n;
  }
}

std::int64_t SplitMix64::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  const std::uint64_t r =
      span == std::numeric_limits<std::uint64_t>::max() ? next_u64() : below(span + 1);
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + r);
}

bool SplitMix64::chance(double p) {
  if (p <= 0) return false;
  if (p >= 1) return true;
  return next_double() < p;
}

SplitMix64 SplitMix64::split() {
  const std::uint64_t child_seed = next_u64();
  seed_ += gamma_;
  return SplitMix64(child_seed, mix_gamma(seed_));
}

std::pair<GenContext, GenContext> split(const GenContext& ctx) {
  GenContext left = ctx;
  GenContext right = ctx;
  right.rng = left.rng.split();
  right.budget_used = 0;
  return {left, right};
}

}  // namespace ancheck
