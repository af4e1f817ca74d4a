#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "qglm/errors.hpp"
#include "qglm/preprocess.hpp"

using namespace qglm;

namespace {

const char* kHeader = "X,Y,month,day,FFMC,DMC,DC,ISI,temp,RH,wind,rain,area";

std::string write_csv(const std::string& name, const std::string& body) {
  const std::string path = "/tmp/" + name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("forest fires loader maps months and days to numbers") {
  const std::string path = write_csv(
      "qglm_ff_ok.csv",
      std::string(kHeader) +
          "\n7,5,mar,fri,86.2,26.2,94.3,5.1,8.2,51,6.7,0,0\n"
          "8,6,oct,sun,90.6,35.4,669.1,6.7,18,33,0.9,0,2.51\n"
          "1,2,jan,mon,91.7,33.3,77.5,9,8.3,97,4,0.2,0\n");
  const RawTable table = load_forest_fires(path);
  REQUIRE(table.columns.size() == 13);
  CHECK(table.columns.front() == "X");
  CHECK(table.columns.back() == "area");
  REQUIRE(table.values.rows() == 3);
  REQUIRE(table.values.cols() == 13);
  CHECK(table.values(0, 2) == 3.0);   // mar
  CHECK(table.values(0, 3) == 5.0);   // fri
  CHECK(table.values(1, 2) == 10.0);  // oct
  CHECK(table.values(1, 3) == 7.0);   // sun
  CHECK(table.values(2, 2) == 1.0);   // jan
  CHECK(table.values(2, 3) == 1.0);   // mon
  CHECK(table.values(1, 12) == doctest::Approx(2.51));
  CHECK(table.values(2, 11) == doctest::Approx(0.2));
  std::remove(path.c_str());
}

TEST_CASE("forest fires loader names a missing column") {
  const std::string path = write_csv(
      "qglm_ff_missing.csv",
      "X,Y,month,day,FFMC,DMC,DC,ISI,temp,RH,wind,area\n"
      "7,5,mar,fri,86.2,26.2,94.3,5.1,8.2,51,6.7,0\n");
  try {
    load_forest_fires(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("rain") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("forest fires loader reports row and column of a bad cell") {
  const std::string path = write_csv(
      "qglm_ff_badcell.csv",
      std::string(kHeader) +
          "\n7,5,mar,fri,86.2,26.2,94.3,5.1,8.2,51,6.7,0,0\n"
          "8,6,oct,sun,90.6,35.4,669.1,6.7,oops,33,0.9,0,2.51\n");
  try {
    load_forest_fires(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("row 3") != std::string::npos);
    CHECK(what.find("temp") != std::string::npos);
    CHECK(what.find("oops") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("forest fires loader rejects short rows and unknown tokens") {
  const std::string short_row = write_csv(
      "qglm_ff_short.csv",
      std::string(kHeader) + "\n7,5,mar,fri,86.2\n");
  CHECK_THROWS_AS(load_forest_fires(short_row), DataError);
  std::remove(short_row.c_str());

  const std::string bad_month = write_csv(
      "qglm_ff_badmonth.csv",
      std::string(kHeader) +
          "\n7,5,january,fri,86.2,26.2,94.3,5.1,8.2,51,6.7,0,0\n");
  CHECK_THROWS_AS(load_forest_fires(bad_month), DataError);
  std::remove(bad_month.c_str());

  CHECK_THROWS_AS(load_forest_fires("/tmp/qglm_ff_does_not_exist.csv"),
                  DataError);
}

TEST_CASE("standardize matches the population closed form") {
  Eigen::MatrixXd m(3, 1);
  m << 1.0, 2.0, 3.0;
  const Standardized s = standardize_features(m);
  REQUIRE(s.kept_columns == std::vector<int>{0});
  CHECK(s.mean[0] == doctest::Approx(2.0));
  CHECK(s.sd[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(s.matrix(0, 0) == doctest::Approx(-std::sqrt(1.5)));
  CHECK(s.matrix(1, 0) == doctest::Approx(0.0));
  CHECK(s.matrix(2, 0) == doctest::Approx(std::sqrt(1.5)));
}

TEST_CASE("standardize is idempotent and drops constant columns") {
  Eigen::MatrixXd m(6, 3);
  m << 1, 7, 0.1, 2, 7, 0.5, 3, 7, -0.4, 4, 7, 1.2, 5, 7, 0.0, 6, 7, -0.9;
  const Standardized s = standardize_features(m);
  CHECK(s.kept_columns == std::vector<int>{0, 2});
  CHECK(s.dropped_columns == std::vector<int>{1});
  REQUIRE(s.matrix.cols() == 2);
  for (Eigen::Index c = 0; c < 2; ++c) {
    CHECK(std::abs(s.matrix.col(c).mean()) < 1e-12);
    CHECK(s.matrix.col(c).squaredNorm() / 6.0 == doctest::Approx(1.0));
  }
  const Standardized again = standardize_features(s.matrix);
  CHECK(again.matrix.isApprox(s.matrix, 1e-12));

  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(5, 2, 3.0);
  CHECK_THROWS_AS(standardize_features(flat), DataError);
  CHECK_THROWS_AS(standardize_features(Eigen::MatrixXd(1, 2)),
                  ParameterError);
}

TEST_CASE("outcome scaler sends the percentile anchors to the interval ends") {
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) y[i] = std::exp(0.3 * i) - 1.0;
  const ScaledOutcome s = scale_outcome(y);
  // 20 values: 0.5th/99.5th nearest-rank percentiles are the extremes
  CHECK(s.scaler.lo == doctest::Approx(std::log1p(y.minCoeff())));
  CHECK(s.scaler.hi == doctest::Approx(std::log1p(y.maxCoeff())));
  CHECK(s.scaled.minCoeff() == doctest::Approx(-3.0));
  CHECK(s.scaled.maxCoeff() == doctest::Approx(3.0));
  CHECK(s.clamped_low == 0);
  CHECK(s.clamped_high == 0);

  // monotone in the raw outcome
  for (int i = 0; i + 1 < 20; ++i) CHECK(s.scaled[i] < s.scaled[i + 1]);

  // inverse round-trips interior points
  for (int i = 1; i < 19; ++i) {
    CHECK(s.scaler.inverse(s.scaled[i]) ==
          doctest::Approx(y[i]).epsilon(1e-10));
  }
}

TEST_CASE("outcome scaler clamps and counts outliers") {
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) y[i] = 0.01 * i;
  y[199] = 1e6;  // far beyond the 99.5th percentile anchor
  const ScaledOutcome s = scale_outcome(y);
  CHECK(s.clamped_high == 1);
  CHECK(s.clamped_low == 0);
  CHECK(s.scaled[199] == 3.0);
  CHECK(s.scaled.maxCoeff() <= 3.0);
  CHECK(s.scaled.minCoeff() >= -3.0);
}

TEST_CASE("outcome scaler rejects bad inputs") {
  Eigen::VectorXd negative(12);
  for (int i = 0; i < 12; ++i) negative[i] = i - 6.0;
  CHECK_THROWS_AS(scale_outcome(negative), ParameterError);
  const ScaledOutcome linear = scale_outcome_linear(negative);
  CHECK(linear.scaled.minCoeff() == doctest::Approx(-3.0));
  CHECK_FALSE(linear.scaler.use_log1p);

  CHECK_THROWS_AS(scale_outcome(Eigen::VectorXd::Ones(5)), ParameterError);
  CHECK_THROWS_AS(scale_outcome(Eigen::VectorXd::Ones(12)), DataError);
  Eigen::VectorXd with_nan = Eigen::VectorXd::Ones(12);
  with_nan[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(scale_outcome(with_nan), ParameterError);
}

TEST_CASE("train/test split partitions deterministically") {
  const auto a = train_test_split(1000, 0.7, 42);
  const auto b = train_test_split(1000, 0.7, 42);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(a.first.size() == 700);
  CHECK(a.second.size() == 300);
  CHECK(std::is_sorted(a.first.begin(), a.first.end()));
  CHECK(std::is_sorted(a.second.begin(), a.second.end()));

  std::vector<bool> seen(1000, false);
  for (int i : a.first) seen[i] = true;
  for (int i : a.second) {
    CHECK_FALSE(seen[i]);
    seen[i] = true;
  }
  for (bool hit : seen) CHECK(hit);

  const auto c = train_test_split(1000, 0.7, 43);
  CHECK(a.first != c.first);

  const auto fires = train_test_split(517, 0.7, 1);
  CHECK(fires.first.size() == 362);
  CHECK(fires.second.size() == 155);

  CHECK_THROWS_AS(train_test_split(1, 0.7, 1), ParameterError);
  CHECK_THROWS_AS(train_test_split(10, 0.0, 1), ParameterError);
  CHECK_THROWS_AS(train_test_split(10, 1.0, 1), ParameterError);
}

TEST_CASE("forest fires pipeline produces an embedded dataset") {
  std::string body = kHeader;
  body += "\n";
  const char* months[] = {"jan", "feb", "mar", "apr", "may", "jun",
                          "jul", "aug", "sep", "oct", "nov", "dec"};
  const char* days[] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
  for (int i = 0; i < 90; ++i) {
    const double t = 0.1 * i;
    char row[256];
    std::snprintf(row, sizeof(row),
                  "%d,%d,%s,%s,%.1f,%.1f,%.1f,%.1f,%.1f,%d,%.1f,%.1f,%.2f\n",
                  1 + i % 9, 2 + i % 7, months[i % 12], days[i % 7],
                  85.0 + std::sin(t) * 5.0, 20.0 + 3.0 * (i % 11),
                  90.0 + 40.0 * std::cos(t), 5.0 + 0.3 * (i % 13),
                  8.0 + 0.7 * (i % 17), 30 + i % 50, 1.0 + 0.2 * (i % 8),
                  (i % 10 == 0) ? 0.2 : 0.0,
                  (i % 3 == 0) ? 0.0 : std::exp(0.05 * i) - 1.0);
    body += row;
  }
  const std::string path = write_csv("qglm_ff_pipeline.csv", body);

  TsneConfig config;
  config.out_dims = 2;
  config.perplexity = 8.0;
  config.iterations = 80;
  config.seed = 3;
  const PreprocessResult result = preprocess_forest_fires(path, config, 7);
  CHECK(result.dataset.features.rows() == 90);
  CHECK(result.dataset.features.cols() == 2);
  CHECK(result.dataset.features.cwiseAbs().maxCoeff() <= 3.0);
  CHECK(result.dataset.targets_scaled.size() == 90);
  CHECK(result.dataset.train_indices.size() == 63);
  CHECK(result.dataset.test_indices.size() == 27);
  CHECK(result.provenance.find("rows = 90") != std::string::npos);
  CHECK(result.provenance.find("split_seed = 7") != std::string::npos);
  CHECK(result.provenance.find("tsne_seed = 3") != std::string::npos);

  const PreprocessResult again = preprocess_forest_fires(path, config, 7);
  CHECK((again.dataset.features.array() ==
         result.dataset.features.array()).all());
  CHECK(again.provenance == result.provenance);
  std::remove(path.c_str());
}
