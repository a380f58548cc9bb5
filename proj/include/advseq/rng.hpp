#pragma once

// splitmix64 used as a counter-based generator: the state is a counter
// advanced by a fixed odd constant and every output is a bijective mix of it.
// Each trial owns an independent stream seeded by stable_hash, so results do
// not depend on how trials are scheduled.

#include <cstdint>
#include <initializer_list>

namespace advseq {

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Platform-independent hash of a short tuple of 64-bit words.
inline constexpr std::uint64_t stable_hash(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : words) h = splitmix64_mix(h ^ splitmix64_mix(w + 0x9e3779b97f4a7c15ULL));
  return h;
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : counter_(seed) {}

  constexpr std::uint64_t next() noexcept {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(counter_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t counter_;
};

inline std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial,
                                int hypothesis) noexcept {
  return stable_hash({master_seed, trial, static_cast<std::uint64_t>(hypothesis)});
}

}  // namespace advseq
