#pragma once

// Deterministic random source (splitmix64 + explicit Box-Muller normals) so
// seeded experiment reruns are bit-identical regardless of the standard
// library's distribution internals.

#include <cmath>
#include <cstdint>

namespace zonal {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    do {
      u = uniform();
    } while (u == 0.0);
    const double v = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u));
    spare_ = mag * std::sin(2.0 * M_PI * v);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * v);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace zonal
