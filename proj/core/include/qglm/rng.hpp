#pragma once

#include <cstdint>
#include <random>

namespace qglm {

// Seeded random source used everywhere randomness is needed.
//
// The raw bit stream comes from std::mt19937_64, whose output sequence is
// pinned by the standard. The distribution transforms live here instead of
// going through the std::*_distribution adapters because those adapters are
// implementation-defined and would break byte-for-byte reproducibility
// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform();

  // Uniform on (0, 1]; never zero, safe under log().
  double uniform_pos();

  // Uniform integer on [0, bound); rejection sampling, no modulo bias.
  // bound must be positive.
  std::uint64_t uniform_int(std::uint64_t bound);

  // Standard normal via Box-Muller. The paired variate is cached, so draws
  // alternate between two uniforms and zero uniforms consumed.
  double normal();

  // Poisson(lambda) by Knuth's product method. Large lambda is split into
  // chunks of at most 500 (Poisson additivity) so the running product stays
  // away from the underflow threshold.
  long long poisson(double lambda);

  // Gamma(shape, scale) by the Marsaglia-Tsang squeeze method; shape < 1 is
  // handled with the usual U^(1/shape) boost.
  double gamma(double shape, double scale);

  // Inverse Gaussian(mean mu, shape lambda) via the chi-square transform
  // of Michael, Schucany and Haas.
  double inverse_gaussian(double mu, double lambda);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qglm
