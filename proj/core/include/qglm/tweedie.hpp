#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "qglm/dataset.hpp"
#include "qglm/rng.hpp"

namespace qglm {

// Tweedie mean/variance family: E(Y) = mu, Var(Y) = phi * mu^xi, with the
// log mean model mu = exp(x . w) over the signal features. Supported xi:
// 0 (normal), 1 (scaled Poisson), (1,2) (compound Poisson-gamma),
// 2 (gamma), 3 (inverse Gaussian).
struct TweedieSpec {
  double power_xi = 1.0;
  double dispersion_phi = 8.0;
  Eigen::VectorXd coefficients;  // one per signal feature
  int num_noise_features = 1;
};

// The simulation scenario used throughout: 3 signal features with weights
// (0.5, 0.3, -0.4), one noise feature, xi = 1, phi = 8.
TweedieSpec default_tweedie_spec();

// One draw with mean mu and variance phi * mu^xi.
double sample_tweedie(double mu, double phi, double xi, Rng& rng);

// Synthetic dataset: standard-normal features (clamped to [-3, 3] so the
// displacement encoding stays in range), log mean model on the signal
// features, Tweedie outcomes, scaled targets, seeded 70/30 split. The same
// seed always reproduces the dataset bit for bit.
Dataset simulate_dataset(const TweedieSpec& spec, int n, std::uint64_t seed);

// Classifies a (phi, xi) pair into its named distribution family.
std::string family_lookup(double phi, double xi);

}  // namespace qglm
