#include <doctest.h>

#include <cmath>

#include "qglm/errors.hpp"
#include "qglm/rng.hpp"
#include "qglm/tsne.hpp"

using namespace qglm;

namespace {

Eigen::MatrixXd random_points(int n, int dims, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd points(n, dims);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dims; ++d) points(i, d) = rng.normal();
  }
  return points;
}

// two blobs of n/2 points each, centers 0 and `separation` along every axis
Eigen::MatrixXd two_clusters(int n, int dims, double separation,
                             std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd points(n, dims);
  for (int i = 0; i < n; ++i) {
    const double center = i < n / 2 ? 0.0 : separation;
    for (int d = 0; d < dims; ++d) points(i, d) = center + 0.3 * rng.normal();
  }
  return points;
}

double row_entropy(const Eigen::MatrixXd& p, int i) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    const double v = p(i, j);
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace

TEST_CASE("conditional affinities are row-stochastic with calibrated entropy") {
  const Eigen::MatrixXd points = random_points(40, 3, 21);
  const double perplexity = 10.0;
  const Eigen::MatrixXd p = tsne_conditional_affinities(points, perplexity);
  REQUIRE(p.rows() == 40);
  REQUIRE(p.cols() == 40);
  CHECK(p.minCoeff() >= 0.0);
  for (int i = 0; i < 40; ++i) {
    CHECK(p(i, i) == 0.0);
    CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row_entropy(p, i) ==
          doctest::Approx(std::log(perplexity)).epsilon(1e-5));
  }
}

TEST_CASE("near-duplicate rows get the largest conditional affinity") {
  Eigen::MatrixXd points = random_points(30, 3, 22);
  points.row(7) = points.row(3) + Eigen::RowVector3d(1e-4, 0, 0);
  const Eigen::MatrixXd p = tsne_conditional_affinities(points, 5.0);
  Eigen::Index best = 0;
  p.row(3).maxCoeff(&best);
  CHECK(best == 7);
  p.row(7).maxCoeff(&best);
  CHECK(best == 3);
}

TEST_CASE("well-separated clusters stay separated in the embedding") {
  const int n = 60;
  const Eigen::MatrixXd points = two_clusters(n, 5, 10.0, 23);
  TsneConfig config;
  config.out_dims = 2;
  config.perplexity = 10.0;
  config.iterations = 800;
  config.seed = 5;
  const TsneResult result = tsne_embed(points, config);
  REQUIRE(result.embedding.rows() == n);
  REQUIRE(result.embedding.cols() == 2);

  const Eigen::RowVectorXd mean_a =
      result.embedding.topRows(n / 2).colwise().mean();
  const Eigen::RowVectorXd mean_b =
      result.embedding.bottomRows(n / 2).colwise().mean();
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    const double da = (result.embedding.row(i) - mean_a).squaredNorm();
    const double db = (result.embedding.row(i) - mean_b).squaredNorm();
    const bool assigned_a = da < db;
    if (assigned_a == (i < n / 2)) ++correct;
  }
  CHECK(correct >= 57);  // 95% of 60
}

TEST_CASE("KL divergence improves after the exaggeration phase") {
  const Eigen::MatrixXd points = two_clusters(50, 4, 6.0, 24);
  TsneConfig config;
  config.out_dims = 2;
  config.perplexity = 9.0;
  config.iterations = 1000;
  config.seed = 6;
  const TsneResult result = tsne_embed(points, config);
  REQUIRE(result.kl_checkpoints.size() == 10);
  CHECK(result.kl_checkpoints.front().first == 100);
  CHECK(result.kl_checkpoints.back().first == 1000);
  double kl_400 = 0.0, kl_1000 = 0.0;
  for (const auto& [iteration, kl] : result.kl_checkpoints) {
    CHECK(std::isfinite(kl));
    CHECK(kl >= 0.0);
    if (iteration == 400) kl_400 = kl;
    if (iteration == 1000) kl_1000 = kl;
  }
  CHECK(kl_1000 <= kl_400 + 1e-6);
}

TEST_CASE("embedding columns are standardized and clamped") {
  const Eigen::MatrixXd points = random_points(45, 6, 25);
  TsneConfig config;
  config.out_dims = 4;
  config.perplexity = 12.0;
  config.iterations = 300;
  config.seed = 7;
  const TsneResult result = tsne_embed(points, config);
  REQUIRE(result.embedding.cols() == 4);
  CHECK(result.embedding.cwiseAbs().maxCoeff() <= 3.0);
  for (int d = 0; d < 4; ++d) {
    CHECK(std::abs(result.embedding.col(d).mean()) < 0.05);
    const double sd = std::sqrt(result.embedding.col(d).squaredNorm() / 45.0);
    CHECK(sd > 0.85);
    CHECK(sd < 1.01);
  }

  const TsneResult again = tsne_embed(points, config);
  CHECK((again.embedding.array() == result.embedding.array()).all());
}

TEST_CASE("tsne validates its configuration") {
  const Eigen::MatrixXd points = random_points(20, 3, 26);
  TsneConfig config;
  config.perplexity = 10.0;  // needs 30 rows
  CHECK_THROWS_AS(tsne_embed(points, config), ParameterError);
  CHECK_THROWS_AS(tsne_conditional_affinities(points, 0.0), ParameterError);
  CHECK_THROWS_AS(tsne_conditional_affinities(points, -2.0), ParameterError);

  config.perplexity = 5.0;
  config.out_dims = 0;
  CHECK_THROWS_AS(tsne_embed(points, config), ParameterError);
  config.out_dims = 2;
  config.iterations = 0;
  CHECK_THROWS_AS(tsne_embed(points, config), ParameterError);
  config.iterations = 10;
  config.learning_rate = 0.0;
  CHECK_THROWS_AS(tsne_embed(points, config), ParameterError);
}
