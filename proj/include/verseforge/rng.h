#ifndef VERSEFORGE_RNG_H_
#define VERSEFORGE_RNG_H_

#include <cstdint>
#include <random>

namespace verseforge {

// std::mt19937_64 has a standardized output sequence, but the std
// distributions do not. These helpers keep every draw reproducible across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double NextDouble() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n). n must be positive.
  std::uint64_t NextBelow(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace verseforge

#endif  // VERSEFORGE_RNG_H_
