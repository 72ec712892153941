#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ragnar {

/// Identifier recorded in run manifests. Changing the generator or the seed
/// derivation below must change this string.
inline constexpr const char* kPrngAlgorithm = "mt19937_64+splitmix64";

/// SplitMix64 finaliser; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the `index`-th member of an ensemble generated from `base_seed`.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(splitmix64(base_seed) ^ splitmix64(index + 0x5851F42D4C957F2DULL));
}

/// mt19937_64 has a fully specified output sequence, unlike the standard
/// distribution objects, so only raw 64-bit draws are used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (used only for synthetic data).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Integer threshold t with P(draw < t) = p for a uniform 64-bit draw,
/// i.e. t = p * 2^64 computed exactly from the binary mantissa of p.
/// p >= 1 must be handled by the caller (no 64-bit threshold represents it).
inline std::uint64_t bernoulli_threshold(double p) {
  if (!(p > 0.0)) return 0;
  if (p >= 1.0) return ~std::uint64_t{0};
  int exp = 0;
  const double frac = std::frexp(p, &exp);  // p = frac * 2^exp, frac in [0.5, 1)
  const auto mantissa = static_cast<std::uint64_t>(std::ldexp(frac, 53));
  const int shift = exp + 11;  // 64 - 53
  if (shift >= 0) return mantissa << shift;
  if (shift <= -64) return 0;
  return mantissa >> (-shift);
}

}  // namespace ragnar
