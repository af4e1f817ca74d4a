#include "qglm/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qglm/errors.hpp"
#include "qglm/rng.hpp"
#include "qglm/text.hpp"

namespace qglm {

namespace {

const std::vector<std::string>& forest_fires_columns() {
  static const std::vector<std::string> columns = {
      "X",    "Y",  "month", "day",  "FFMC", "DMC", "DC",
      "ISI",  "temp", "RH",  "wind", "rain", "area"};
  return columns;
}

int month_number(const std::string& token) {
  static const char* names[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                "jul", "aug", "sep", "oct", "nov", "dec"};
  for (int i = 0; i < 12; ++i) {
    if (token == names[i]) return i + 1;
  }
  return 0;
}

int day_number(const std::string& token) {
  static const char* names[] = {"mon", "tue", "wed", "thu", "fri", "sat",
                                "sun"};
  for (int i = 0; i < 7; ++i) {
    if (token == names[i]) return i + 1;
  }
  return 0;
}

[[noreturn]] void cell_error(std::size_t row, const std::string& column,
                             const std::string& token) {
  throw DataError("forest fires: row " + std::to_string(row) + ", column " +
                  column + ": cannot parse '" + token + "'");
}

// nearest-rank percentile on a sorted copy
double percentile(std::vector<double> sorted_values, double pct) {
  const std::size_t n = sorted_values.size();
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(pct / 100.0 * static_cast<double>(n)));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return sorted_values[rank - 1];
}

ScaledOutcome fit_scaler(const Eigen::VectorXd& y_raw, bool use_log1p) {
  if (y_raw.size() < 10) {
    throw ParameterError("scale_outcome: need at least 10 observations");
  }
  Eigen::VectorXd transformed(y_raw.size());
  for (Eigen::Index i = 0; i < y_raw.size(); ++i) {
    const double y = y_raw[i];
    if (!std::isfinite(y)) {
      throw ParameterError("scale_outcome: non-finite outcome");
    }
    if (use_log1p && y < 0.0) {
      throw ParameterError("scale_outcome: negative outcome");
    }
    transformed[i] = use_log1p ? std::log1p(y) : y;
  }
  std::vector<double> sorted(transformed.data(),
                             transformed.data() + transformed.size());
  std::sort(sorted.begin(), sorted.end());
  ScaledOutcome out;
  out.scaler.use_log1p = use_log1p;
  out.scaler.lo = percentile(sorted, 0.5);
  out.scaler.hi = percentile(sorted, 99.5);
  if (!(out.scaler.hi > out.scaler.lo)) {
    throw DataError("scale_outcome: outcome is degenerate, percentile "
                    "anchors coincide");
  }
  out.scaled.resize(y_raw.size());
  for (Eigen::Index i = 0; i < y_raw.size(); ++i) {
    const double span = out.scaler.hi - out.scaler.lo;
    const double s = -3.0 + 6.0 * (transformed[i] - out.scaler.lo) / span;
    if (s < -3.0) ++out.clamped_low;
    if (s > 3.0) ++out.clamped_high;
    out.scaled[i] = std::min(3.0, std::max(-3.0, s));
  }
  return out;
}

}  // namespace

RawTable load_forest_fires(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("forest fires: cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("forest fires: empty file '" + path + "'");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto& expected = forest_fires_columns();
  const std::vector<std::string> header = split(line, ',');
  if (header != expected) {
    for (const std::string& name : expected) {
      if (std::find(header.begin(), header.end(), name) == header.end()) {
        throw DataError("forest fires: missing column '" + name + "'");
      }
    }
    throw DataError("forest fires: unexpected header '" + line + "'");
  }

  std::vector<std::array<double, 13>> rows;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != expected.size()) {
      throw DataError("forest fires: row " + std::to_string(row_number) +
                      " has " + std::to_string(fields.size()) +
                      " fields, expected 13");
    }
    std::array<double, 13> parsed{};
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string cell = trim(fields[c]);
      if (expected[c] == "month") {
        const int m = month_number(cell);
        if (m == 0) cell_error(row_number, expected[c], cell);
        parsed[c] = m;
      } else if (expected[c] == "day") {
        const int d = day_number(cell);
        if (d == 0) cell_error(row_number, expected[c], cell);
        parsed[c] = d;
      } else {
        try {
          parsed[c] = parse_double(cell);
        } catch (const DataError&) {
          cell_error(row_number, expected[c], cell);
        }
      }
    }
    rows.push_back(parsed);
  }
  if (rows.empty()) {
    throw DataError("forest fires: no data rows in '" + path + "'");
  }

  RawTable table;
  table.columns = expected;
  table.values.resize(static_cast<Eigen::Index>(rows.size()), 13);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < 13; ++c) {
      table.values(static_cast<Eigen::Index>(r), c) = rows[r][c];
    }
  }
  return table;
}

Standardized standardize_features(const Eigen::MatrixXd& features) {
  const Eigen::Index n = features.rows();
  const Eigen::Index p = features.cols();
  if (n < 2 || p < 1) {
    throw ParameterError(
        "standardize_features: need at least 2 rows and 1 column");
  }
  Standardized out;
  std::vector<double> means, sds;
  for (Eigen::Index c = 0; c < p; ++c) {
    const double mean = features.col(c).mean();
    const double sd =
        std::sqrt((features.col(c).array() - mean).square().sum() / n);
    if (sd < 1e-12 * std::max(1.0, std::abs(mean))) {
      out.dropped_columns.push_back(static_cast<int>(c));
    } else {
      out.kept_columns.push_back(static_cast<int>(c));
      means.push_back(mean);
      sds.push_back(sd);
    }
  }
  if (out.kept_columns.empty()) {
    throw DataError("standardize_features: all columns are constant");
  }
  out.matrix.resize(n, static_cast<Eigen::Index>(out.kept_columns.size()));
  out.mean.resize(static_cast<Eigen::Index>(means.size()));
  out.sd.resize(static_cast<Eigen::Index>(sds.size()));
  for (std::size_t k = 0; k < out.kept_columns.size(); ++k) {
    const Eigen::Index c = out.kept_columns[k];
    out.mean[static_cast<Eigen::Index>(k)] = means[k];
    out.sd[static_cast<Eigen::Index>(k)] = sds[k];
    out.matrix.col(static_cast<Eigen::Index>(k)) =
        (features.col(c).array() - means[k]) / sds[k];
  }
  return out;
}

double OutcomeScaler::scale(double y_raw) const {
  if (use_log1p && y_raw < 0.0) {
    throw ParameterError("scale_outcome: negative outcome");
  }
  const double t = use_log1p ? std::log1p(y_raw) : y_raw;
  const double s = -3.0 + 6.0 * (t - lo) / (hi - lo);
  return std::min(3.0, std::max(-3.0, s));
}

Eigen::VectorXd OutcomeScaler::scale(const Eigen::VectorXd& y_raw) const {
  Eigen::VectorXd out(y_raw.size());
  for (Eigen::Index i = 0; i < y_raw.size(); ++i) out[i] = scale(y_raw[i]);
  return out;
}

double OutcomeScaler::inverse(double y_scaled) const {
  const double clamped = std::min(3.0, std::max(-3.0, y_scaled));
  const double t = lo + (clamped + 3.0) * (hi - lo) / 6.0;
  return use_log1p ? std::expm1(t) : t;
}

ScaledOutcome scale_outcome(const Eigen::VectorXd& y_raw) {
  return fit_scaler(y_raw, true);
}

ScaledOutcome scale_outcome_linear(const Eigen::VectorXd& y_raw) {
  return fit_scaler(y_raw, false);
}

std::pair<std::vector<int>, std::vector<int>> train_test_split(
    int n, double fraction, std::uint64_t seed) {
  if (n < 2) {
    throw ParameterError("train_test_split: need at least 2 observations");
  }
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw ParameterError("train_test_split: fraction must be in (0, 1)");
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(
        rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  const int train_count =
      static_cast<int>(std::llround(fraction * static_cast<double>(n)));
  std::vector<int> train(order.begin(), order.begin() + train_count);
  std::vector<int> test(order.begin() + train_count, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

PreprocessResult preprocess_forest_fires(const std::string& csv_path,
                                         const TsneConfig& tsne_config,
                                         std::uint64_t split_seed) {
  const RawTable table = load_forest_fires(csv_path);
  const Eigen::Index n = table.values.rows();
  const Eigen::MatrixXd predictors = table.values.leftCols(12);
  const Eigen::VectorXd outcome = table.values.col(12);

  const Standardized standardized = standardize_features(predictors);
  const TsneResult embedding = tsne_embed(standardized.matrix, tsne_config);
  const ScaledOutcome scaled = scale_outcome(outcome);
  auto split = train_test_split(static_cast<int>(n), 0.7, split_seed);

  PreprocessResult result;
  result.dataset.features = embedding.embedding;
  result.dataset.targets_raw = outcome;
  result.dataset.targets_scaled = scaled.scaled;
  result.dataset.train_indices = std::move(split.first);
  result.dataset.test_indices = std::move(split.second);

  std::ostringstream prov;
  prov << "forest fires preprocessing\n";
  prov << "rows = " << n << "\n";
  prov << "tsne_seed = " << tsne_config.seed << "\n";
  prov << "tsne_out_dims = " << tsne_config.out_dims << "\n";
  prov << "tsne_perplexity = " << format_g17(tsne_config.perplexity) << "\n";
  prov << "tsne_iterations = " << tsne_config.iterations << "\n";
  prov << "split_seed = " << split_seed << "\n";
  prov << "scaler_log1p = " << (scaled.scaler.use_log1p ? "true" : "false")
       << "\n";
  prov << "scaler_lo = " << format_g17(scaled.scaler.lo) << "\n";
  prov << "scaler_hi = " << format_g17(scaled.scaler.hi) << "\n";
  prov << "clamped_low = " << scaled.clamped_low << "\n";
  prov << "clamped_high = " << scaled.clamped_high << "\n";
  prov << "dropped_columns =";
  if (standardized.dropped_columns.empty()) {
    prov << " none";
  } else {
    for (int c : standardized.dropped_columns) {
      prov << " " << table.columns[static_cast<std::size_t>(c)];
    }
  }
  prov << "\n";
  for (const auto& [iteration, kl] : embedding.kl_checkpoints) {
    if (iteration % 200 == 0) {
      prov << "tsne_kl_" << iteration << " = " << format_g17(kl) << "\n";
    }
  }
  result.provenance = prov.str();
  return result;
}

}  // namespace qglm
