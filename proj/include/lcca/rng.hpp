#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lcca {

/// Deterministic random stream. mt19937_64 supplies the bits (its output
/// sequence is pinned by the standard); all variate transformations are done
/// here by hand so streams are bit-reproducible across platforms and library
/// versions, which std::*_distribution does not guarantee.
class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32)};
    gen_.seed(seq);
  }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per draw.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Poisson by inversion of the CDF. Fine for the small means used here.
  int poisson(double lambda) {
    const double u = uniform();
    double term = std::exp(-lambda);
    double cum = term;
    int k = 0;
    while (u > cum && k < 10000) {
      ++k;
      term *= lambda / k;
      cum += term;
    }
    return k;
  }

private:
  std::mt19937_64 gen_;
};

/// Mixes (seed, stream) into a child seed so that replicate streams are
/// mutually independent and stable across runs. splitmix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline Rng derive_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

}  // namespace lcca
