#include "qglm/dataset.hpp"

#include <fstream>

#include "qglm/errors.hpp"
#include "qglm/text.hpp"

namespace qglm {

Eigen::MatrixXd Dataset::rows(const std::vector<int>& indices) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), features.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = features.row(indices[i]);
  }
  return out;
}

Eigen::VectorXd Dataset::raw(const std::vector<int>& indices) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = targets_raw[indices[i]];
  }
  return out;
}

Eigen::VectorXd Dataset::scaled(const std::vector<int>& indices) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = targets_scaled[indices[i]];
  }
  return out;
}

void write_dataset_csv(const Dataset& dataset, const std::string& path) {
  const int n = dataset.num_observations();
  const int m = dataset.num_features();
  if (dataset.targets_raw.size() != n || dataset.targets_scaled.size() != n) {
    throw ParameterError("write_dataset_csv: target lengths do not match rows");
  }
  std::vector<char> is_train(static_cast<std::size_t>(n), 0);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int idx : dataset.train_indices) {
    if (idx < 0 || idx >= n) throw ParameterError("write_dataset_csv: bad train index");
    is_train[idx] = 1;
    seen[idx] = 1;
  }
  for (int idx : dataset.test_indices) {
    if (idx < 0 || idx >= n) throw ParameterError("write_dataset_csv: bad test index");
    if (seen[idx]) throw ParameterError("write_dataset_csv: index in both splits");
    seen[idx] = 1;
  }
  for (int i = 0; i < n; ++i) {
    if (!seen[i]) throw ParameterError("write_dataset_csv: row missing from split");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (int j = 0; j < m; ++j) out << "x" << (j + 1) << ",";
  out << "y_raw,y_scaled,split\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) out << format_g17(dataset.features(i, j)) << ",";
    out << format_g17(dataset.targets_raw[i]) << ","
        << format_g17(dataset.targets_scaled[i]) << ","
        << (is_train[i] ? "train" : "test") << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  if (header.size() < 4) throw DataError(path + ": header too short");
  const int m = static_cast<int>(header.size()) - 3;
  for (int j = 0; j < m; ++j) {
    if (header[j] != "x" + std::to_string(j + 1)) {
      throw DataError(path + ": expected column x" + std::to_string(j + 1) +
                      ", got '" + header[j] + "'");
    }
  }
  if (header[m] != "y_raw" || header[m + 1] != "y_scaled" ||
      header[m + 2] != "split") {
    throw DataError(path + ": header must end with y_raw,y_scaled,split");
  }

  std::vector<std::vector<double>> feature_rows;
  std::vector<double> raw;
  std::vector<double> scaled;
  std::vector<int> train_indices;
  std::vector<int> test_indices;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (static_cast<int>(fields.size()) != m + 3) {
      throw DataError(path + ": line " + std::to_string(line_number) +
                      " has " + std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(m + 3));
    }
    std::vector<double> row(m);
    try {
      for (int j = 0; j < m; ++j) row[j] = parse_double(fields[j]);
      raw.push_back(parse_double(fields[m]));
      scaled.push_back(parse_double(fields[m + 1]));
    } catch (const DataError& e) {
      throw DataError(path + ": line " + std::to_string(line_number) + ": " +
                      e.what());
    }
    const std::string& tag = fields[m + 2];
    const int row_index = static_cast<int>(feature_rows.size());
    if (tag == "train") {
      train_indices.push_back(row_index);
    } else if (tag == "test") {
      test_indices.push_back(row_index);
    } else {
      throw DataError(path + ": line " + std::to_string(line_number) +
                      ": split must be 'train' or 'test', got '" + tag + "'");
    }
    feature_rows.push_back(std::move(row));
  }
  if (feature_rows.empty()) throw DataError(path + ": no data rows");

  Dataset dataset;
  const int n = static_cast<int>(feature_rows.size());
  dataset.features.resize(n, m);
  dataset.targets_raw.resize(n);
  dataset.targets_scaled.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) dataset.features(i, j) = feature_rows[i][j];
    dataset.targets_raw[i] = raw[i];
    dataset.targets_scaled[i] = scaled[i];
  }
  dataset.train_indices = std::move(train_indices);
  dataset.test_indices = std::move(test_indices);
  return dataset;
}

}  // namespace qglm
