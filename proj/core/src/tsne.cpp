#include "qglm/tsne.hpp"

#include <cmath>
#include <limits>

#include "qglm/errors.hpp"
#include "qglm/rng.hpp"

namespace qglm {

namespace {

constexpr int kExaggerationIters = 250;
constexpr double kEntropyTol = 1e-7;
constexpr int kMaxBisections = 50;

// Shannon entropy (nats) and conditional row p_{j|i} for precision beta.
double conditional_row(const Eigen::VectorXd& dist_sq, int self, double beta,
                       Eigen::VectorXd& row) {
  const int n = static_cast<int>(dist_sq.size());
  double dmin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    if (j != self && dist_sq[j] < dmin) dmin = dist_sq[j];
  }
  double sum = 0.0;
  double weighted = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == self) {
      row[j] = 0.0;
      continue;
    }
    const double e = std::exp(-beta * (dist_sq[j] - dmin));
    row[j] = e;
    sum += e;
    weighted += dist_sq[j] * e;
  }
  row /= sum;
  return std::log(sum) + beta * (weighted / sum - dmin);
}

}  // namespace

Eigen::MatrixXd tsne_conditional_affinities(const Eigen::MatrixXd& points,
                                            double perplexity) {
  const int n = static_cast<int>(points.rows());
  if (!(perplexity > 0.0)) {
    throw ParameterError("tsne_embed: perplexity must be positive");
  }
  if (static_cast<double>(n) < 3.0 * perplexity) {
    throw ParameterError(
        "tsne_embed: perplexity too large, need at least 3*perplexity rows");
  }

  // pairwise squared distances
  Eigen::MatrixXd dist_sq(n, n);
  {
    const Eigen::VectorXd norms = points.rowwise().squaredNorm();
    dist_sq.noalias() = -2.0 * points * points.transpose();
    dist_sq.colwise() += norms;
    dist_sq.rowwise() += norms.transpose();
    dist_sq = dist_sq.cwiseMax(0.0);
  }

  // per-row bandwidth calibration by bisection on the entropy
  const double target_entropy = std::log(perplexity);
  Eigen::MatrixXd conditional(n, n);
  Eigen::VectorXd row(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd di = dist_sq.row(i).transpose();
    double beta = 1.0;
    double h = conditional_row(di, i, beta, row);
    double beta_lo = 0.0, beta_hi = 0.0;
    bool have_lo = false, have_hi = false;
    // entropy decreases in beta; bracket the target first
    for (int step = 0; step < 64 && std::abs(h - target_entropy) > kEntropyTol;
         ++step) {
      if (h > target_entropy) {
        beta_lo = beta;
        have_lo = true;
        if (!have_hi) {
          beta *= 2.0;
        } else {
          beta = 0.5 * (beta_lo + beta_hi);
        }
      } else {
        beta_hi = beta;
        have_hi = true;
        if (!have_lo) {
          beta *= 0.5;
        } else {
          beta = 0.5 * (beta_lo + beta_hi);
        }
      }
      h = conditional_row(di, i, beta, row);
      if (have_lo && have_hi) break;
    }
    for (int step = 0;
         step < kMaxBisections && std::abs(h - target_entropy) > kEntropyTol &&
         have_lo && have_hi;
         ++step) {
      if (h > target_entropy) {
        beta_lo = beta;
      } else {
        beta_hi = beta;
      }
      beta = 0.5 * (beta_lo + beta_hi);
      h = conditional_row(di, i, beta, row);
    }
    conditional.row(i) = row;
  }
  return conditional;
}

TsneResult tsne_embed(const Eigen::MatrixXd& points, const TsneConfig& config) {
  const int n = static_cast<int>(points.rows());
  if (config.out_dims < 1) {
    throw ParameterError("tsne_embed: out_dims must be at least 1");
  }
  if (config.iterations < 1) {
    throw ParameterError("tsne_embed: iterations must be at least 1");
  }
  if (!(config.perplexity > 0.0) || !(config.learning_rate > 0.0) ||
      !(config.early_exaggeration > 0.0)) {
    throw ParameterError(
        "tsne_embed: perplexity, learning_rate and early_exaggeration must "
        "be positive");
  }

  const Eigen::MatrixXd conditional =
      tsne_conditional_affinities(points, config.perplexity);

  // symmetrized joint affinities, sum exactly 1 by construction
  Eigen::MatrixXd p = (conditional + conditional.transpose()) / (2.0 * n);

  Rng rng(config.seed);
  Eigen::MatrixXd y(n, config.out_dims);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < config.out_dims; ++d) {
      y(i, d) = 1e-2 * rng.normal();
    }
  }

  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, config.out_dims);
  Eigen::MatrixXd grad(n, config.out_dims);
  Eigen::MatrixXd weight(n, n);

  const auto student_weights = [&]() {
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
      weight(i, i) = 0.0;
      for (int j = i + 1; j < n; ++j) {
        const double w =
            1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
        weight(i, j) = w;
        weight(j, i) = w;
        z += 2.0 * w;
      }
    }
    return z;
  };

  TsneResult result;
  for (int iter = 0; iter < config.iterations; ++iter) {
    const double exaggeration =
        iter < kExaggerationIters ? config.early_exaggeration : 1.0;
    const double momentum = iter < kExaggerationIters ? 0.5 : 0.8;

    const double z = student_weights();
    grad.setZero();
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double w = weight(i, j);
        const double coeff =
            4.0 * (exaggeration * p(i, j) - w / z) * w;
        for (int d = 0; d < config.out_dims; ++d) {
          const double g = coeff * (y(i, d) - y(j, d));
          grad(i, d) += g;
          grad(j, d) -= g;
        }
      }
    }

    velocity = momentum * velocity - config.learning_rate * grad;
    y += velocity;
    y.rowwise() -= y.colwise().mean();

    const int done = iter + 1;
    if (done % 100 == 0 || done == config.iterations) {
      const double z_now = student_weights();
      double kl = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const double pij = p(i, j);
          if (pij <= 0.0) continue;
          const double qij = weight(i, j) / z_now;
          kl += 2.0 * pij * std::log(pij / qij);
        }
      }
      result.kl_checkpoints.emplace_back(done, kl);
    }
  }

  // standardize columns and clamp so downstream encodings stay in range
  for (int d = 0; d < config.out_dims; ++d) {
    const double mean = y.col(d).mean();
    y.col(d).array() -= mean;
    const double sd = std::sqrt(y.col(d).squaredNorm() / n);
    if (sd > 1e-15) y.col(d) /= sd;
  }
  result.embedding = y.cwiseMax(-3.0).cwiseMin(3.0);
  return result;
}

}  // namespace qglm
