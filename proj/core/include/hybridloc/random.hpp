#pragma once

#include <cstdint>
#include <initializer_list>

namespace hybridloc {

/// Counter-based deterministic random stream (splitmix64).
///
/// Streams are addressed by a 64-bit key; substreams derive keys by
/// folding path components through the splitmix64 finalizer:
///
///   key(seed, p1, p2, ...) = fin(...fin(fin(seed) ^ fin(p1)) ^ fin(p2)...)
///   state_i = key + i * 0x9E3779B97F4A7C15
///   output_i = fin(state_i)
///
/// where fin(z) is the splitmix64 output mix. Every consumer of
/// randomness in this project derives its stream through stream_key so
/// results are reproducible independently of scheduling.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double next_uniform();

  /// Uniform in [lo, hi).
  double next_uniform(double lo, double hi);

  /// Standard normal via Box-Muller (two uniforms per pair, cached).
  double next_gaussian();

 private:
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

std::uint64_t splitmix64_fin(std::uint64_t z);

std::uint64_t stream_key(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> path);

}  // namespace hybridloc
