#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "nctorus/element.hpp"

namespace nctorus {

/// 64-bit seeded generator; draws are formed from raw engine output so the
/// stream is identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Coefficients with |c_{m,n}| = amplitude * rho^{max(|m|,|n|)} * s, s uniform in
/// (0,1], and uniformly random phases.
inline TorusElement random_element(double theta, int radius, double rho, Rng& rng,
                                   double amplitude = 1.0) {
  TorusElement a(theta, radius);
  for (int m = -radius; m <= radius; ++m)
    for (int n = -radius; n <= radius; ++n) {
      const double mag = amplitude * std::pow(rho, std::max(std::abs(m), std::abs(n))) * (1.0 - rng.uniform());
      a.ref(m, n) = std::polar(mag, kTwoPi * rng.uniform());
    }
  return a;
}

/// Symmetrized random_element.
inline TorusElement random_self_adjoint(double theta, int radius, double rho, Rng& rng,
                                        double amplitude = 1.0) {
  return self_adjoint_part(random_element(theta, radius, rho, rng, amplitude));
}

}  // namespace nctorus
