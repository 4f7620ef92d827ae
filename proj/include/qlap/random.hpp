#pragma once

// Portable seeded randomness.
//
// SplitMix64 generator plus hand-written distribution mappings, so a given
// seed yields the same stream on every platform and standard library.
//
// Stream splitting: substream(name, index) derives a new seed as
//   mix64(mix64(root_seed ^ fnv1a64(name)) + (index + 1) * 0x9e3779b97f4a7c15)
// from the ROOT seed of the parent (not its current position), so substreams
// are independent of how many values the parent has already produced.

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace qlap {

std::uint64_t mix64(std::uint64_t z);
std::uint64_t fnv1a64(std::string_view s);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, bound), unbiased.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t integer(std::int64_t lo, std::int64_t hi);

  Rng substream(std::string_view name, std::uint64_t index = 0) const;

  /// Fisher-Yates, high index first.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace qlap
