#include "hybridloc/random.hpp"

#include <cmath>
#include <numbers>

namespace hybridloc {

std::uint64_t splitmix64_fin(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

std::uint64_t stream_key(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = splitmix64_fin(seed);
  for (std::uint64_t part : path) key = splitmix64_fin(key ^ splitmix64_fin(part));
  return key;
}

std::uint64_t RandomStream::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return splitmix64_fin(state_);
}

double RandomStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_uniform(double lo, double hi) {
  return lo + (hi - lo) * next_uniform();
}

double RandomStream::next_gaussian() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // Guard against log(0); the offset keeps u1 in (0, 1].
  const double u1 = 1.0 - next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

}  // namespace hybridloc
