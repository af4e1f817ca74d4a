#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qglm {

struct TsneConfig {
  int out_dims = 4;
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  // Affinities are multiplied by this factor for the first 250 iterations;
  // momentum switches from 0.5 to 0.8 at the same point.
  double early_exaggeration = 12.0;
  std::uint64_t seed = 1;
};

struct TsneResult {
  // N x out_dims, columns standardized to mean 0 / sd 1 and clamped to
  // [-3, 3].
  Eigen::MatrixXd embedding;
  // (iterations_done, KL divergence) recorded every 100 iterations and at
  // the final iteration, always against the un-exaggerated affinities.
  std::vector<std::pair<int, double>> kl_checkpoints;
};

// Exact (quadratic-cost) t-SNE. Per-point Gaussian bandwidths are calibrated
// by bisection so each conditional distribution hits the configured
// perplexity. Requires rows >= 3 * perplexity.
TsneResult tsne_embed(const Eigen::MatrixXd& points, const TsneConfig& config);

// Row-stochastic conditional affinity matrix p_{j|i} after bandwidth
// calibration (the quantity tsne_embed symmetrizes). Row entropies hit
// log(perplexity) within the calibration tolerance.
Eigen::MatrixXd tsne_conditional_affinities(const Eigen::MatrixXd& points,
                                            double perplexity);

}  // namespace qglm
