#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace otac {

// Mixing function for sub-stream seed derivation (splitmix64 finalizer).
// A realization index m gets the seed splitmix64(master ^ (m+1)*golden),
// so sub-streams are decorrelated and individually reproducible.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ (index + 1) * 0x9e3779b97f4a7c15ULL);
}

// Seedable random stream. Gaussian variates are produced by Box-Muller on
// the raw engine output instead of std::normal_distribution, whose mapping
// is implementation-defined; this keeps traces reproducible for a given
// libm. Each gaussian/complex draw consumes exactly two engine outputs.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  RandomStream derive(std::uint64_t index) const {
    return RandomStream(derive_seed(seed_, index));
  }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // N(0, stddev^2). Consumes two engine outputs.
  double gaussian(double stddev) {
    const auto [re, im] = gaussian_pair();
    (void)im;
    return stddev * re;
  }

  // Circularly-symmetric complex gaussian CN(0, variance):
  // real and imaginary parts are independent N(0, variance/2).
  std::complex<double> complex_gaussian(double variance) {
    const auto [re, im] = gaussian_pair();
    const double s = std::sqrt(0.5 * variance);
    return {s * re, s * im};
  }

 private:
  // Box-Muller: two independent N(0,1) from one uniform pair.
  std::pair<double, double> gaussian_pair() {
    // Shift into (0, 1] so the log stays finite.
    const double u1 =
        static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace otac
