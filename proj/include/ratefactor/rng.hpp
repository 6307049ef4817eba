#pragma once

#include <cstdint>
#include <cstddef>

namespace ratefactor {

// Deterministic RNG with identical output on every platform (the standard
// library's distributions are implementation-defined, which would break
// seeded reproducibility across toolchains). SplitMix64 core; normals via
// Box-Muller (two uniforms per draw, no cached state); Poisson via sequential
// inversion for small means and transformed rejection for large ones.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal(double mean = 0.0, double sd = 1.0);
  // Exact Poisson draw; mean >= 0 (mean 0 returns 0).
  long poisson(double mean);
  // Uniform index in [0, n); n > 0.
  std::size_t index(std::size_t n);

 private:
  std::uint64_t state_;
};

// Seed of the `index`-th sub-stream under `master`. Sub-streams are
// statistically independent, so parallel or reordered tasks reproduce the
// same results as a serial run.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

}  // namespace ratefactor
