#pragma once

#include <cstdint>
#include <initializer_list>

namespace lalign {

/// Counter-based SplitMix64 stream.
///
/// The n-th output (n = 0, 1, ...) of a stream with key K is
///   mix64(K + (n + 1) * 0x9E3779B97F4A7C15)
/// where mix64 is the SplitMix64 finalizer. Uniform doubles take the top 53
/// bits; normals use the cosine branch of Box-Muller on two consecutive
/// uniforms. Sub-streams are keyed with derive(). The full definition lives in
/// docs/rng.md so other implementations can reproduce every stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix64(std::uint64_t z);

  /// Key of the sub-stream reached by folding each path element into `seed`.
  static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  /// Standard normal.
  double normal();
  /// Uniform integer in [0, bound), bound > 0. Uses rejection to avoid modulo bias.
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace lalign
