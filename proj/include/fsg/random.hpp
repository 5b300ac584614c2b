#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace fsg {

// splitmix64 step, used to fold several integers into one stream seed so that
// per-image / per-draw sub-seeds are decorrelated but fully reproducible.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) { return splitmix64(splitmix64(a) ^ (b + 0x9e3779b97f4a7c15ULL)); }

inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) { return mix_seed(mix_seed(a, b), c); }

inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  return mix_seed(mix_seed(a, b, c), d);
}

// Deterministic random source. std::mt19937_64 output is pinned by the
// standard, but the std distributions are not — their algorithms are
// implementation-defined — so the uniform/gaussian transforms are written out
// here to make sequences bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound). Modulo bias is irrelevant at the bounds
  // used here (image coordinates), and the modulo keeps the draw count per
  // call fixed, which the reproducibility contract relies on.
  int uniform_int(int bound) { return static_cast<int>(engine_() % static_cast<uint64_t>(bound)); }

  // Standard normal via Box-Muller; pairs are generated together and the
  // spare is handed out on the next call.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fsg
