#include "qglm/tweedie.hpp"

#include <cmath>

#include "qglm/errors.hpp"
#include "qglm/preprocess.hpp"

namespace qglm {

TweedieSpec default_tweedie_spec() {
  TweedieSpec spec;
  spec.power_xi = 1.0;
  spec.dispersion_phi = 8.0;
  spec.coefficients.resize(3);
  spec.coefficients << 0.5, 0.3, -0.4;
  spec.num_noise_features = 1;
  return spec;
}

double sample_tweedie(double mu, double phi, double xi, Rng& rng) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ParameterError("sample_tweedie: mu must be positive");
  }
  if (!(phi > 0.0) || !std::isfinite(phi)) {
    throw ParameterError("sample_tweedie: phi must be positive");
  }
  if (xi == 0.0) {
    return mu + std::sqrt(phi) * rng.normal();
  }
  if (xi == 1.0) {
    return phi * static_cast<double>(rng.poisson(mu / phi));
  }
  if (xi > 1.0 && xi < 2.0) {
    const double rate = std::pow(mu, 2.0 - xi) / (phi * (2.0 - xi));
    const double shape = (2.0 - xi) / (xi - 1.0);
    const double scale = phi * (xi - 1.0) * std::pow(mu, xi - 1.0);
    const long long events = rng.poisson(rate);
    if (events == 0) return 0.0;
    // the sum of k iid gammas with common scale is gamma(k * shape, scale)
    return rng.gamma(static_cast<double>(events) * shape, scale);
  }
  if (xi == 2.0) {
    return rng.gamma(1.0 / phi, phi * mu);
  }
  if (xi == 3.0) {
    return rng.inverse_gaussian(mu, 1.0 / phi);
  }
  throw ParameterError("sample_tweedie: unsupported power xi (supported: 0, "
                       "1, (1,2), 2, 3)");
}

Dataset simulate_dataset(const TweedieSpec& spec, int n, std::uint64_t seed) {
  if (n < 10) {
    throw ParameterError("simulate_dataset: need at least 10 observations");
  }
  if (spec.coefficients.size() < 1) {
    throw ParameterError("simulate_dataset: need at least 1 signal feature");
  }
  if (spec.num_noise_features < 0) {
    throw ParameterError(
        "simulate_dataset: num_noise_features must be nonnegative");
  }
  const int signal = static_cast<int>(spec.coefficients.size());
  const int m = signal + spec.num_noise_features;

  Rng rng(seed);
  Dataset data;
  data.features.resize(n, m);
  data.targets_raw.resize(n);
  for (int i = 0; i < n; ++i) {
    double predictor = 0.0;
    for (int k = 0; k < m; ++k) {
      double x = rng.normal();
      x = std::min(3.0, std::max(-3.0, x));
      data.features(i, k) = x;
      if (k < signal) predictor += spec.coefficients[k] * x;
    }
    const double mu = std::exp(predictor);
    data.targets_raw[i] =
        sample_tweedie(mu, spec.dispersion_phi, spec.power_xi, rng);
  }

  const ScaledOutcome scaled = spec.power_xi == 0.0
                                   ? scale_outcome_linear(data.targets_raw)
                                   : scale_outcome(data.targets_raw);
  data.targets_scaled = scaled.scaled;

  auto indices = train_test_split(n, 0.7, seed);
  data.train_indices = std::move(indices.first);
  data.test_indices = std::move(indices.second);
  return data;
}

std::string family_lookup(double phi, double xi) {
  if (!(phi > 0.0) || !std::isfinite(phi)) {
    throw ParameterError("family_lookup: phi must be positive");
  }
  if (!(xi >= 0.0) || !std::isfinite(xi)) {
    throw ParameterError("family_lookup: xi must be nonnegative");
  }
  if (phi == 1.0) {
    if (xi == 0.0) return "Normal";
    if (xi == 1.0) return "Poisson";
    if (xi > 1.0 && xi < 2.0) return "Compound Poisson";
    if (xi == 2.0) return "Gamma";
    if (xi == 3.0) return "Inverse-Gaussian";
    if (xi > 2.0) return "Stable";
  } else if (xi == 1.0) {
    return phi > 1.0 ? "Negative Binomial" : "Underdispersion Poisson";
  }
  return "Unique Tweedie";
}

}  // namespace qglm
