#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace clwe {

// Finalizer of the splitmix64 generator. Used to whiten user seeds and to
// derive decorrelated per-shard seeds from a master seed.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random stream. All library samplers take an explicit stream,
// never hidden state, so a (params, seed) pair fixes every output bit.
//
// Gaussians come from the trigonometric Box-Muller transform rather than
// std::normal_distribution: the standard distribution's algorithm is
// implementation-defined, which would break cross-toolchain reproducibility
// of dataset files.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // Stream for shard `shard` of a master seed. Sharded generation must cut
  // work into fixed-size blocks keyed by shard index so the result does not
  // depend on how many threads execute the blocks.
  static RandomStream split(std::uint64_t master_seed, std::uint64_t shard) {
    return RandomStream(splitmix64(master_seed) ^ splitmix64(0x5851f42d4c957f2dULL + shard));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53 random bits.
  double next_uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal N(0, 1).
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = next_uniform();
    } while (u1 == 0.0);
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi_v<double> * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double next_gaussian(double sigma) { return sigma * next_gaussian(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace clwe
