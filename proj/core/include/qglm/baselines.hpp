#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qglm/errors.hpp"

namespace qglm {

// Design matrix with an intercept column is rank deficient.
class SingularDesignError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Iterative fit ran out of iterations or diverged; carries the last iterate
// (intercept first, then coefficients).
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& message, Eigen::VectorXd iterate)
      : NumericError(message), last_iterate(std::move(iterate)) {}

  Eigen::VectorXd last_iterate;
};

enum class Link { kIdentity, kLog };

struct LinearModel {
  Eigen::VectorXd coefficients;  // empty for the constant model
  double intercept = 0.0;
  Link link = Link::kIdentity;

  double predict_one(const Eigen::VectorXd& features) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;
};

// Constant model predicting the training-target mean.
LinearModel fit_mean(const Eigen::VectorXd& train_targets);

struct PoissonFit {
  LinearModel model;  // log link
  // Wald standard errors, intercept first, then one per coefficient.
  Eigen::VectorXd std_errors;
  std::vector<double> deviance_trace;  // after each IRLS update
  int iterations = 0;
};

// Poisson GLM with log link by iteratively reweighted least squares on raw
// nonnegative outcomes. Convergence when the largest coefficient change
// drops below tol; coefficients beyond magnitude 30 are treated as
// divergence.
PoissonFit fit_poisson_irls(const Eigen::MatrixXd& features,
                            const Eigen::VectorXd& targets,
                            int max_iter = 100, double tol = 1e-10);

// One IRLS update from the given iterate (intercept first). Exposed so the
// step can be checked against the closed-form weighted least squares
// solution.
Eigen::VectorXd poisson_irls_step(const Eigen::MatrixXd& features,
                                  const Eigen::VectorXd& targets,
                                  const Eigen::VectorXd& beta);

struct BoostStep {
  int feature = 0;
  double intercept = 0.0;
  double slope = 0.0;
};

struct BoostedModel {
  double offset = 0.0;     // training-target mean
  double shrinkage = 0.1;  // nu
  std::vector<BoostStep> steps;

  int step_count() const { return static_cast<int>(steps.size()); }
  double predict_one(const Eigen::VectorXd& features) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;
};

// Componentwise L2 boosting with simple-linear-regression base learners:
// each step refits every single feature to the current residuals, keeps the
// one with the lowest residual sum of squares (ties to the lowest index)
// and adds shrinkage times that learner. Runs exactly mstop steps.
BoostedModel fit_boosted_linear(const Eigen::MatrixXd& features,
                                const Eigen::VectorXd& targets,
                                int mstop = 100, double shrinkage = 0.1);

// Mean squared error in scaled-outcome units.
double scaled_mse(const Eigen::VectorXd& predictions,
                  const Eigen::VectorXd& targets_scaled);

}  // namespace qglm
