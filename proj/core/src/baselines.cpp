#include "qglm/baselines.hpp"

#include <cmath>

namespace qglm {

namespace {

constexpr double kDivergenceBound = 30.0;

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& features) {
  Eigen::MatrixXd x(features.rows(), features.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(features.cols()) = features;
  return x;
}

double poisson_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0) dev += y[i] * std::log(y[i] / mu[i]);
    dev -= y[i] - mu[i];
  }
  return 2.0 * dev;
}

Eigen::VectorXd irls_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  const Eigen::VectorXd mu = eta.array().exp();
  // working response z = eta + (y - mu)/mu, weights W = diag(mu)
  const Eigen::VectorXd z = eta.array() + (y - mu).array() / mu.array();
  const Eigen::MatrixXd xtw = x.transpose() * mu.asDiagonal();
  const Eigen::MatrixXd a = xtw * x;
  const Eigen::VectorXd b = xtw * z;
  return a.ldlt().solve(b);
}

}  // namespace

double LinearModel::predict_one(const Eigen::VectorXd& features) const {
  double eta = intercept;
  if (coefficients.size() > 0) {
    if (features.size() != coefficients.size()) {
      throw ParameterError("LinearModel: feature count mismatch");
    }
    eta += coefficients.dot(features);
  }
  return link == Link::kLog ? std::exp(eta) : eta;
}

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& features) const {
  Eigen::VectorXd eta =
      Eigen::VectorXd::Constant(features.rows(), intercept);
  if (coefficients.size() > 0) {
    if (features.cols() != coefficients.size()) {
      throw ParameterError("LinearModel: feature count mismatch");
    }
    eta += features * coefficients;
  }
  if (link == Link::kLog) return eta.array().exp();
  return eta;
}

LinearModel fit_mean(const Eigen::VectorXd& train_targets) {
  if (train_targets.size() == 0) {
    throw ParameterError("fit_mean: no targets");
  }
  LinearModel model;
  model.intercept = train_targets.mean();
  model.link = Link::kIdentity;
  return model;
}

Eigen::VectorXd poisson_irls_step(const Eigen::MatrixXd& features,
                                  const Eigen::VectorXd& targets,
                                  const Eigen::VectorXd& beta) {
  const Eigen::MatrixXd x = with_intercept(features);
  if (beta.size() != x.cols()) {
    throw ParameterError("poisson_irls_step: beta must have one entry per "
                         "column plus the intercept");
  }
  return irls_solve(x, targets, beta);
}

PoissonFit fit_poisson_irls(const Eigen::MatrixXd& features,
                            const Eigen::VectorXd& targets, int max_iter,
                            double tol) {
  if (features.rows() != targets.size() || targets.size() == 0) {
    throw ParameterError("fit_poisson_irls: need one target per row");
  }
  if ((targets.array() < 0.0).any()) {
    throw ParameterError("fit_poisson_irls: targets must be nonnegative");
  }
  const Eigen::MatrixXd x = with_intercept(features);
  {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < x.cols()) {
      throw SingularDesignError(
          "fit_poisson_irls: design matrix with intercept is rank "
          "deficient");
    }
  }

  PoissonFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  beta[0] = std::log(std::max(targets.mean(), 0.1));
  bool converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd next = irls_solve(x, targets, beta);
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    ++fit.iterations;
    fit.deviance_trace.push_back(
        poisson_deviance(targets, (x * beta).array().exp()));
    if (beta.cwiseAbs().maxCoeff() > kDivergenceBound) {
      throw ConvergenceError("fit_poisson_irls: diverging coefficients", beta);
    }
    if (change < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("fit_poisson_irls: no convergence in " +
                               std::to_string(max_iter) + " iterations",
                           beta);
  }

  fit.model.intercept = beta[0];
  fit.model.coefficients = beta.tail(beta.size() - 1);
  fit.model.link = Link::kLog;

  const Eigen::VectorXd mu = (x * beta).array().exp();
  const Eigen::MatrixXd info = x.transpose() * mu.asDiagonal() * x;
  const Eigen::MatrixXd cov = info.inverse();
  fit.std_errors = cov.diagonal().cwiseSqrt();
  return fit;
}

double BoostedModel::predict_one(const Eigen::VectorXd& features) const {
  double pred = offset;
  for (const BoostStep& step : steps) {
    pred += shrinkage * (step.intercept + step.slope * features[step.feature]);
  }
  return pred;
}

Eigen::VectorXd BoostedModel::predict(const Eigen::MatrixXd& features) const {
  Eigen::VectorXd pred = Eigen::VectorXd::Constant(features.rows(), offset);
  for (const BoostStep& step : steps) {
    pred.array() +=
        shrinkage * (step.intercept + step.slope * features.col(step.feature).array());
  }
  return pred;
}

BoostedModel fit_boosted_linear(const Eigen::MatrixXd& features,
                                const Eigen::VectorXd& targets, int mstop,
                                double shrinkage) {
  const Eigen::Index n = features.rows();
  if (n < 2 || targets.size() != n) {
    throw ParameterError(
        "fit_boosted_linear: need at least 2 rows and one target per row");
  }
  if (mstop < 0 || !(shrinkage > 0.0) || shrinkage > 1.0) {
    throw ParameterError(
        "fit_boosted_linear: mstop must be nonnegative and shrinkage in "
        "(0, 1]");
  }

  BoostedModel model;
  model.offset = targets.mean();
  model.shrinkage = shrinkage;
  Eigen::VectorXd residual = targets.array() - model.offset;

  const Eigen::Index p = features.cols();
  Eigen::VectorXd col_mean(p), col_var(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    col_mean[j] = features.col(j).mean();
    col_var[j] = (features.col(j).array() - col_mean[j]).square().sum() /
                 static_cast<double>(n);
  }

  for (int step = 0; step < mstop; ++step) {
    int best = -1;
    double best_rss = 0.0, best_b0 = 0.0, best_b1 = 0.0;
    const double res_mean = residual.mean();
    for (Eigen::Index j = 0; j < p; ++j) {
      double b1 = 0.0;
      if (col_var[j] > 0.0) {
        const double cov = ((features.col(j).array() - col_mean[j]) *
                            (residual.array() - res_mean))
                               .sum() /
                           static_cast<double>(n);
        b1 = cov / col_var[j];
      }
      const double b0 = res_mean - b1 * col_mean[j];
      const double rss =
          (residual.array() - b0 - b1 * features.col(j).array())
              .square()
              .sum();
      if (best < 0 || rss < best_rss) {
        best = static_cast<int>(j);
        best_rss = rss;
        best_b0 = b0;
        best_b1 = b1;
      }
    }
    model.steps.push_back({best, best_b0, best_b1});
    residual.array() -=
        shrinkage * (best_b0 + best_b1 * features.col(best).array());
  }
  return model;
}

double scaled_mse(const Eigen::VectorXd& predictions,
                  const Eigen::VectorXd& targets_scaled) {
  if (predictions.size() != targets_scaled.size() || predictions.size() == 0) {
    throw ParameterError("scaled_mse: length mismatch");
  }
  return (predictions - targets_scaled).squaredNorm() /
         static_cast<double>(predictions.size());
}

}  // namespace qglm
