#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dab {

// Deterministic random source. The generators below are written out
// explicitly (instead of std::*_distribution) because the standard leaves
// distribution algorithms implementation-defined and we promise
// bitwise-reproducible streams for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1), 53 random mantissa bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n). Modulo bias is irrelevant at our scales but cheap to
  // avoid, so rejection-sample the top of the range away.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return v % n;
  }

  // Standard normal via Box-Muller. Generates pairs; the spare is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Normal(0, stddev^2) restricted to +-2 stddev, by rejection.
  double truncated_normal(double stddev) {
    double z = normal();
    while (std::fabs(z) > 2.0) z = normal();
    return stddev * z;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace dab
