#pragma once

#include <cstdint>
#include <random>

namespace fracgrad {

/// splitmix64 finalizer; mixes (base, index) into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Seeded stream with portable uniform/normal draws.
///
/// The standard distributions are implementation-defined, so uniforms are
/// built from the top 53 bits of mt19937_64 and normals by Box-Muller. Output
/// is identical across standard libraries for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fracgrad
