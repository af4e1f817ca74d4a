#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qglm {

// A modeling-ready table: features (rows = observations), the raw outcome,
// the scaled outcome actually used for training, and a train/test split
// stored as row indices (both lists sorted ascending).
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd targets_raw;
  Eigen::VectorXd targets_scaled;
  std::vector<int> train_indices;
  std::vector<int> test_indices;

  int num_observations() const { return static_cast<int>(features.rows()); }
  int num_features() const { return static_cast<int>(features.cols()); }

  Eigen::MatrixXd rows(const std::vector<int>& indices) const;
  Eigen::VectorXd raw(const std::vector<int>& indices) const;
  Eigen::VectorXd scaled(const std::vector<int>& indices) const;
};

// CSV with header x1,...,xM,y_raw,y_scaled,split; split is "train" or
// "test"; numbers are %.17g; lines end with LF. Row order is preserved, so
// write(read(file)) reproduces the file byte for byte.
void write_dataset_csv(const Dataset& dataset, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

}  // namespace qglm
