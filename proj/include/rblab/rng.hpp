#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rblab {

/// Counter-based generator: every draw is a pure function of
/// (seed, path, step, dim), so simulation results do not depend on the
/// order in which increments are consumed.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform in (0, 1), exclusive on both ends.
  double uniform(std::uint64_t path, std::uint64_t step, std::uint64_t dim) const {
    return to_unit(word(path, step, dim, 0));
  }

  /// Standard normal via Box-Muller on two counter words.
  double normal(std::uint64_t path, std::uint64_t step, std::uint64_t dim) const {
    const double u1 = to_unit(word(path, step, dim, 1));
    const double u2 = to_unit(word(path, step, dim, 2));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Fair coin, used for lattice path sampling.
  bool flip(std::uint64_t path, std::uint64_t step) const {
    return (word(path, step, 0, 3) & 1u) != 0;
  }

private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t word(std::uint64_t path, std::uint64_t step, std::uint64_t dim,
                     std::uint64_t lane) const {
    std::uint64_t x = mix(seed_ ^ 0x243f6a8885a308d3ull);
    x = mix(x ^ path);
    x = mix(x ^ (step + (dim << 32)));
    return mix(x ^ lane);
  }

  static double to_unit(std::uint64_t w) {
    // 53 mantissa bits, shifted into (0, 1)
    return (static_cast<double>(w >> 11) + 0.5) * 0x1p-53;
  }

  std::uint64_t seed_;
};

}  // namespace rblab
