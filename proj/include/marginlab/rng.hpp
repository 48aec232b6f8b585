#ifndef MARGINLAB_RNG_HPP
#define MARGINLAB_RNG_HPP

#include <cmath>
#include <cstdint>

namespace marginlab {

/// Deterministic 64-bit PRNG: xoshiro256++ (Blackman & Vigna), seeded through
/// splitmix64. The algorithm and constants are fixed here so that dataset
/// generation is reproducible from a seed alone, independent of the standard
/// library's distribution implementations.
class Xoshiro256 {
public:
  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in (0, 1]: 53 mantissa bits, never exactly 0 so it is
  /// safe inside log().
  double uniform01() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (one pair of uniforms per draw; the sine
  /// branch is discarded to keep the stream layout trivial to document).
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Rademacher +/-1 from the top bit.
  double rademacher() { return (next() >> 63) ? 1.0 : -1.0; }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace marginlab

#endif  // MARGINLAB_RNG_HPP
