#include "qglm/rng.hpp"

#include <cmath>

#include "qglm/errors.hpp"

namespace qglm {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  return 1.0 - uniform();
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  if (bound == 0) throw ParameterError("uniform_int: bound must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u = uniform_pos();
  const double v = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u));
  const double angle = 2.0 * M_PI * v;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

long long Rng::poisson(double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda)) {
    throw ParameterError("poisson: lambda must be finite and non-negative");
  }
  long long total = 0;
  // exp(-500) ~ 7e-218, comfortably above the double underflow threshold.
  while (lambda > 500.0) {
    total += poisson(500.0);
    lambda -= 500.0;
  }
  const double threshold = std::exp(-lambda);
  double product = 1.0;
  long long count = -1;
  do {
    ++count;
    product *= uniform_pos();
  } while (product > threshold);
  return total + count;
}

double Rng::gamma(double shape, double scale) {
  if (shape <= 0.0 || scale <= 0.0) {
    throw ParameterError("gamma: shape and scale must be positive");
  }
  if (shape < 1.0) {
    const double boost = std::pow(uniform_pos(), 1.0 / shape);
    return boost * gamma(shape + 1.0, scale);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v * scale;
    }
  }
}

double Rng::inverse_gaussian(double mu, double lambda) {
  if (mu <= 0.0 || lambda <= 0.0) {
    throw ParameterError("inverse_gaussian: mu and lambda must be positive");
  }
  const double n = normal();
  const double y = n * n;
  const double x = mu + mu * mu * y / (2.0 * lambda) -
                   mu / (2.0 * lambda) *
                       std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
  if (uniform() <= mu / (mu + x)) return x;
  return mu * mu / x;
}

}  // namespace qglm
