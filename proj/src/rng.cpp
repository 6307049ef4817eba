#include "ratefactor/rng.hpp"

#include <cmath>

#include "ratefactor/types.hpp"

namespace ratefactor {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer: bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace

std::uint64_t Rng::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double Rng::uniform() {
  // top 53 bits -> [0, 1)
  return double(next_u64() >> 11) * (1.0 / 9007199254740992.0);
}

double Rng::normal(double mean, double sd) {
  // Box-Muller, two uniforms per draw, no cached spare: the stream position
  // after a draw never depends on call history.
  const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
  const double u2 = uniform();
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

long Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw input_error("poisson mean must be finite and nonnegative");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // sequential inversion
    const double p0 = std::exp(-mean);
    double p = p0, cum = p0;
    const double u = uniform();
    long k = 0;
    while (u > cum && k < 10000) {
      ++k;
      p *= mean / double(k);
      cum += p;
    }
    return k;
  }
  // transformed rejection with squeeze (exact for mean >= 10)
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    double u = uniform() - 0.5;
    double v = uniform();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return long(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * log_mean - mean - std::lgamma(kf + 1.0))
      return long(kf);
  }
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw input_error("index range must be nonempty");
  // rejection-free for our purposes: 64-bit state against small n keeps the
  // modulo bias far below anything statistically visible here
  return std::size_t(next_u64() % n);
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master + (index + 1) * kGolden);
}

}  // namespace ratefactor
