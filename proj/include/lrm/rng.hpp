#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace lrm {

// Project-wide RNG contract: seeds are mixed through splitmix64, the stream
// itself is std::mt19937_64 (bit-exact across platforms by the standard), and
// Gaussian variates come from a Box-Muller transform on explicitly constructed
// 53-bit uniforms. normal_distribution is implementation-defined and never used.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic sub-stream seed: root seed mixed with a path of indices.
// Experiment drivers derive per-trial seeds this way.
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = root;
  splitmix64(s);
  for (std::uint64_t p : path) {
    s ^= splitmix64(s) + p;
    splitmix64(s);
  }
  std::uint64_t out = s;
  return splitmix64(out);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix(seed)) {}

  // Uniform in [0, 1), 53 bits of precision.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller, pairwise with a cached spare.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  std::uint64_t next_u64() { return gen_(); }

 private:
  static std::uint64_t mix(std::uint64_t seed) {
    return splitmix64(seed);
  }

  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lrm
