#pragma once

#include <cstdint>
#include <random>

namespace ssmvc {

// Standard distributions are implementation-defined, so bounded draws are done by hand
// to keep runs reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  bool coin() { return (engine_() >> 63) != 0; }

  // True with probability num/den.
  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

 private:
  std::mt19937_64 engine_;
};

constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix64(seed ^ mix64(salt + 0x51ED2701ull));
}

// Shared coin: every node computes the same bit for (seed, epoch, round).
constexpr bool common_coin(std::uint64_t seed, std::uint32_t epoch, std::uint16_t round) {
  return (mix64(derive_seed(seed, 0xC011) ^ (std::uint64_t{epoch} << 16) ^ round) & 1u) != 0;
}

}  // namespace ssmvc
