#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qglm/dataset.hpp"
#include "qglm/tsne.hpp"

namespace qglm {

// Raw Forest Fires table with month/day already mapped to 1-12 / 1-7
// (Monday = 1). Column order matches the file; `area` is last.
struct RawTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
};

// Parses the UCI Forest Fires CSV. Header must be exactly
// X,Y,month,day,FFMC,DMC,DC,ISI,temp,RH,wind,rain,area.
RawTable load_forest_fires(const std::string& path);

struct Standardized {
  Eigen::MatrixXd matrix;       // kept columns only, mean 0 / sd 1
  Eigen::VectorXd mean;         // per kept column
  Eigen::VectorXd sd;           // population sd per kept column
  std::vector<int> kept_columns;
  std::vector<int> dropped_columns;  // constant columns
};

Standardized standardize_features(const Eigen::MatrixXd& features);

// Monotone map from raw outcome units to [-3, 3]: optional log(1+y), then
// the affine map sending [lo, hi] (0.5th / 99.5th percentile anchors of the
// transformed outcome) to [-3, 3], clamping beyond.
struct OutcomeScaler {
  bool use_log1p = true;
  double lo = 0.0;
  double hi = 1.0;

  double scale(double y_raw) const;
  Eigen::VectorXd scale(const Eigen::VectorXd& y_raw) const;
  // inverse on (-3, 3); clamped values map back to the anchors
  double inverse(double y_scaled) const;
};

struct ScaledOutcome {
  Eigen::VectorXd scaled;
  OutcomeScaler scaler;
  int clamped_low = 0;
  int clamped_high = 0;
};

// log1p variant for nonnegative outcomes (areas, counts).
ScaledOutcome scale_outcome(const Eigen::VectorXd& y_raw);
// affine-only variant for outcomes that may be negative (normal targets)
ScaledOutcome scale_outcome_linear(const Eigen::VectorXd& y_raw);

// Seeded shuffle split; both index lists come back sorted.
std::pair<std::vector<int>, std::vector<int>> train_test_split(
    int n, double fraction, std::uint64_t seed);

struct PreprocessResult {
  Dataset dataset;
  std::string provenance;
};

// Full Forest Fires pipeline: load, standardize predictors, t-SNE embed,
// scale the outcome, split. split_seed drives the 70/30 split; the t-SNE
// seed comes from the config.
PreprocessResult preprocess_forest_fires(const std::string& csv_path,
                                         const TsneConfig& tsne_config,
                                         std::uint64_t split_seed);

}  // namespace qglm
