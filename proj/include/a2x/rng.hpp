#pragma once

// Portable seeded randomness. The standard distributions are
// implementation-defined, so everything that ends up in a file is drawn
// through the helpers below on top of std::mt19937_64 (whose output
// sequence the standard does pin down).

#include <cstdint>
#include <random>

namespace a2x {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the `counter`-th substream of `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t counter) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(counter + 1));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Rejection on the top of the range keeps the draw exactly uniform.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint8_t byte() { return static_cast<std::uint8_t>(engine_() >> 56); }

  /// Standard normal draw (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace a2x
