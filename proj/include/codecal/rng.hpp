#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace codecal {

/// The one pseudo-random generator used for every stochastic step (fold
/// shuffles, synthetic corpora). Its output is defined bit-exactly so that
/// other implementations can reproduce fold plans and corpora:
///
///   seeding:  state = splitmix64(seed)
///   step:     state = state * 6364136223846793005 + 1442695040888963407  (mod 2^64)
///   output:   mix64(state)   (the splitmix64 finalizer applied to the new state)
///
/// where splitmix64(x) = mix64(x + 0x9E3779B97F4A7C15) and
///   mix64(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
///             z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
///             return z ^ (z >> 31);
///
/// uniform() = (next_u64() >> 11) * 2^-53, in [0, 1).
/// below(b)  = rejection sampling: draw r until r >= (2^64 - b) mod b, return r mod b.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(splitmix64(seed)) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    return mix64(x + 0x9E3779B97F4A7C15ULL);
  }

  std::uint64_t next_u64() noexcept {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return mix64(state_);
  }

  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Fisher-Yates, walking from the back.
  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace codecal
