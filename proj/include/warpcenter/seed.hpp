#pragma once

#include <cstdint>

namespace warpcenter {

/// SplitMix64 finalizer; a bijective 64-bit mixing function.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Sub-seed for stream `index` under `master`:
///   sub = splitmix64(splitmix64(master) ^ splitmix64(index + 1)).
/// Depends only on (master, index), so per-item work can run in any order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 1));
}

/// Uniform integer in [0, bound) from a 64-bit counter-based stream.
/// Uses rejection on the top of the range so the result is exactly uniform.
class CounterStream {
public:
  explicit constexpr CounterStream(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64(state_);
  }

  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r = next();
    while (r >= limit) r = next();
    return r % bound;
  }

private:
  std::uint64_t state_;
};

}  // namespace warpcenter
