#pragma once

#include <cmath>
#include <cstdint>

namespace stepmap {

// splitmix64 step (Vigna). Used to expand seeds and derive child streams.
inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t x) { return splitmix64_next(x); }

// Child seed for a (master, i, j) stream. Stable across platforms and worker
// counts; grid nodes use (row, column) so results never depend on scheduling.
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0) {
  uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ mix64(a ^ 0xbb67ae8584caa73bULL));
  h = mix64(h ^ mix64(b ^ 0x3c6ef372fe94f82bULL));
  return h;
}

// xoshiro256++ with splitmix64 seeding. Not cryptographic; chosen for exact
// reproducibility (std::uniform_real_distribution is not portable).
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64_next(sm);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (pair cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double kTwoPi = 6.283185307179586;
    spare_ = r * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Radical-inverse (van der Corput) value of `index` in the given base.
inline double halton(uint64_t index, uint32_t base) {
  double f = 1.0;
  double r = 0.0;
  for (uint64_t i = index; i > 0; i /= base) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
  }
  return r;
}

}  // namespace stepmap
