#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "executor.hpp"
#include "qglm/circuit.hpp"
#include "qglm/errors.hpp"
#include "qglm/rng.hpp"
#include "qglm/tweedie.hpp"

using namespace qglm;

namespace {

CircuitParams random_params(int modes, double scale, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd theta(num_circuit_params(modes));
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    theta[i] = scale * (2.0 * rng.uniform() - 1.0);
  }
  return unflatten_params(theta, modes);
}

Eigen::MatrixXd random_features(int rows, int modes, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(rows, modes);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < modes; ++j) {
      x(i, j) = std::clamp(rng.normal(), -3.0, 3.0);
    }
  }
  return x;
}

double batch_mse(const CircuitParams& params, const Eigen::MatrixXd& x,
                 const Eigen::VectorXd& y, const TrainConfig& config) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double f = forward(params, x.row(i).transpose(), config).prediction;
    acc += (f - y[i]) * (f - y[i]);
  }
  return acc / static_cast<double>(x.rows());
}

}  // namespace

TEST_CASE("flat parameter layout round-trips") {
  for (int m : {2, 3, 4}) {
    CAPTURE(m);
    const int p = m * (m - 1) / 2;
    CHECK(num_circuit_params(m) == 4 * p + 4 * m);
    const CircuitParams params = random_params(m, 0.3, 31);
    const Eigen::VectorXd theta = flatten_params(params);
    CHECK(theta.size() == num_circuit_params(m));
    const CircuitParams back = unflatten_params(theta, m);
    CHECK((flatten_params(back) - theta).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.interferometer_1.bs_thetas.size() == p);
    CHECK(back.kerr_kappa.size() == m);
  }
  CHECK_THROWS_AS(unflatten_params(Eigen::VectorXd::Zero(7), 4),
                  ParameterError);
}

TEST_CASE("param_names match the flat layout") {
  const auto names = param_names(4);
  REQUIRE(static_cast<int>(names.size()) == num_circuit_params(4));
  CHECK(names[0] == "i1_bs_theta_0");
  CHECK(names[6] == "i1_bs_phi_0");
  CHECK(names[12] == "i1_phase_0");
  CHECK(names[16] == "squeeze_r_0");
  CHECK(names[20] == "i2_bs_theta_0");
  CHECK(names[36].substr(0, 4) == "kerr");
  // all names unique
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      CHECK(names[i] != names[j]);
    }
  }
}

TEST_CASE("all-zero parameters reproduce the encoded quadrature") {
  TrainConfig config;
  config.cutoff = 10;
  config.encoding_scale = 0.5;
  const CircuitParams zero = zero_circuit_params(4);
  for (double x0 : {-2.0, -0.7, 0.0, 1.3, 2.0}) {
    Eigen::VectorXd x(4);
    x << x0, 0.4, -1.0, 2.0;
    const ForwardResult r = forward(zero, x, config);
    // displacement alpha = 0.5 * x0 gives <x> = 2 Re alpha = x0
    CHECK(r.prediction == doctest::Approx(x0).epsilon(1e-3));
    CHECK(r.pre_norm_squared > 0.9);
  }
}

TEST_CASE("adjoint gradient matches central finite differences") {
  struct Case {
    int modes;
    int cutoff;
  };
  for (const Case tc : {Case{2, 6}, Case{3, 5}}) {
    CAPTURE(tc.modes);
    TrainConfig config;
    config.cutoff = tc.cutoff;
    config.encoding_scale = 0.5;
    const CircuitParams params = random_params(tc.modes, 0.4, 33);
    const Eigen::MatrixXd x = random_features(3, tc.modes, 34);
    Eigen::VectorXd y(3);
    y << 0.5, -1.0, 2.0;

    double mse0 = 0.0;
    const Eigen::VectorXd grad = gradient(params, x, y, config, &mse0);
    CHECK(mse0 == doctest::Approx(batch_mse(params, x, y, config)));

    const Eigen::VectorXd theta = flatten_params(params);
    const double h = 1e-5;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      const double fp =
          batch_mse(unflatten_params(tp, tc.modes), x, y, config);
      const double fm =
          batch_mse(unflatten_params(tm, tc.modes), x, y, config);
      const double fd = (fp - fm) / (2.0 * h);
      CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("executor predictions equal the reference forward pass") {
  const int modes = 3, cutoff = 6;
  TrainConfig config;
  config.cutoff = cutoff;
  config.encoding_scale = 0.5;
  const CircuitParams params = random_params(modes, 0.4, 35);
  // more rows than one tile so the partial-tile path is exercised
  const Eigen::MatrixXd x = random_features(37, modes, 36);

  internal::BatchedExecutor exec(modes, cutoff, config.encoding_scale);
  const Eigen::VectorXd batched = exec.predict(flatten_params(params), x);
  REQUIRE(batched.size() == 37);
  for (int i = 0; i < 37; ++i) {
    const double ref = forward(params, x.row(i).transpose(), config).prediction;
    CHECK(batched[i] == doctest::Approx(ref).epsilon(1e-11));
  }
}

TEST_CASE("executor gradient equals the reference adjoint gradient") {
  const int modes = 3, cutoff = 6;
  TrainConfig config;
  config.cutoff = cutoff;
  config.encoding_scale = 0.5;
  const CircuitParams params = random_params(modes, 0.4, 37);
  const Eigen::MatrixXd x = random_features(37, modes, 38);
  Eigen::VectorXd y(37);
  Rng rng(39);
  for (int i = 0; i < 37; ++i) y[i] = rng.normal();

  double ref_mse = 0.0;
  const Eigen::VectorXd ref = gradient(params, x, y, config, &ref_mse);
  internal::BatchedExecutor exec(modes, cutoff, config.encoding_scale);
  double exec_mse = 0.0;
  const Eigen::VectorXd got =
      exec.gradient(flatten_params(params), x, y, &exec_mse);
  REQUIRE(got.size() == ref.size());
  CHECK(exec_mse == doctest::Approx(ref_mse).epsilon(1e-12));
  for (Eigen::Index k = 0; k < ref.size(); ++k) {
    CHECK(std::abs(got[k] - ref[k]) <=
          std::max(1e-9 * std::abs(ref[k]), 1e-12));
  }
}

TEST_CASE("executor handles nonzero phases and middle-mode squeezing at 4 modes") {
  const int modes = 4, cutoff = 4;
  TrainConfig config;
  config.cutoff = cutoff;
  config.encoding_scale = 0.5;
  CircuitParams params = random_params(modes, 0.5, 40);
  params.interferometer_1.bs_phis[2] = 1.3;
  params.squeeze_r[1] = 0.4;
  params.squeeze_r[2] = -0.35;
  const Eigen::MatrixXd x = random_features(5, modes, 41);
  Eigen::VectorXd y(5);
  y << 0.1, -0.4, 0.9, 0.0, -1.2;

  internal::BatchedExecutor exec(modes, cutoff, config.encoding_scale);
  const Eigen::VectorXd preds = exec.predict(flatten_params(params), x);
  const Eigen::VectorXd grad_ref = gradient(params, x, y, config);
  const Eigen::VectorXd grad_exec =
      exec.gradient(flatten_params(params), x, y);
  for (int i = 0; i < 5; ++i) {
    const double ref = forward(params, x.row(i).transpose(), config).prediction;
    CHECK(preds[i] == doctest::Approx(ref).epsilon(1e-11));
  }
  for (Eigen::Index k = 0; k < grad_ref.size(); ++k) {
    CHECK(std::abs(grad_exec[k] - grad_ref[k]) <=
          std::max(1e-9 * std::abs(grad_ref[k]), 1e-12));
  }
}

TEST_CASE("training reduces the loss on simulated data") {
  TweedieSpec spec = default_tweedie_spec();
  const Dataset data = simulate_dataset(spec, 60, 5);
  TrainConfig config;
  config.cutoff = 6;
  config.iterations = 8;
  config.repeats = 1;
  config.seed = 3;
  const TrainResult result = train(data, config);
  REQUIRE(result.loss_trace.size() == 9);
  CHECK(result.loss_trace.back() < result.loss_trace.front());
  for (double v : result.loss_trace) {
    CHECK(std::isfinite(v));
  }
}

TEST_CASE("train is deterministic in the seed") {
  TweedieSpec spec = default_tweedie_spec();
  const Dataset data = simulate_dataset(spec, 40, 6);
  TrainConfig config;
  config.cutoff = 5;
  config.iterations = 4;
  config.seed = 11;
  const TrainResult a = train(data, config);
  const TrainResult b = train(data, config);
  CHECK(flatten_params(a.params) == flatten_params(b.params));
  CHECK(a.loss_trace == b.loss_trace);
}

TEST_CASE("evaluate_repeated averages per-seed test errors") {
  TweedieSpec spec = default_tweedie_spec();
  const Dataset data = simulate_dataset(spec, 40, 7);
  TrainConfig config;
  config.cutoff = 5;
  config.iterations = 3;
  config.repeats = 3;
  config.seed = 21;
  const RepeatedEvaluation eval = evaluate_repeated(data, config);
  REQUIRE(eval.per_repeat_mse.size() == 3);
  REQUIRE(eval.per_repeat_params.size() == 3);
  double mean = 0.0;
  for (double v : eval.per_repeat_mse) mean += v;
  mean /= 3.0;
  CHECK(eval.mean_test_mse == doctest::Approx(mean));

  // repeat r must equal a single train() run with seed + r
  TrainConfig single = config;
  single.seed = 23;
  const TrainResult direct = train(data, single);
  CHECK(flatten_params(eval.per_repeat_params[2]) ==
        flatten_params(direct.params));
}

TEST_CASE("model files round-trip through save and load") {
  SavedModel model;
  model.num_modes = 3;
  model.cutoff = 7;
  model.encoding_scale = 0.4;
  model.params = random_params(3, 0.3, 44);
  const std::string path = "/tmp/qglm_test_model.txt";
  save_model(model, path);
  const SavedModel back = load_model(path);
  std::remove(path.c_str());
  CHECK(back.num_modes == 3);
  CHECK(back.cutoff == 7);
  CHECK(back.encoding_scale == 0.4);
  CHECK(flatten_params(back.params) == flatten_params(model.params));
}

TEST_CASE("encoding rejects out-of-range features") {
  TrainConfig config;
  config.cutoff = 6;
  const CircuitParams zero = zero_circuit_params(2);
  Eigen::VectorXd x(2);
  x << 4.0, 0.0;
  CHECK_THROWS_AS(forward(zero, x, config), ParameterError);
  CHECK_THROWS_AS(encode_features(x, 6, 0.5), ParameterError);

  internal::BatchedExecutor exec(2, 6, 0.5);
  Eigen::MatrixXd bad(1, 2);
  bad << 4.0, 0.0;
  CHECK_THROWS_AS(exec.predict(flatten_params(zero), bad), ParameterError);
}

TEST_CASE("extreme parameters keep the state normalized") {
  // gates are exponentials of truncated anti-Hermitian generators, so the
  // circuit stays exactly unitary even when squeezing would leak past the
  // cutoff in the untruncated theory; the overflow guard is defensive only
  TrainConfig config;
  config.cutoff = 4;
  CircuitParams params = zero_circuit_params(2);
  params.squeeze_r << 2.5, 2.5;
  Eigen::VectorXd x(2);
  x << 2.0, 2.0;
  const ForwardResult r = forward(params, x, config);
  CHECK(r.pre_norm_squared == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::isfinite(r.prediction));

  internal::BatchedExecutor exec(2, 4, 0.5);
  Eigen::MatrixXd xs = x.transpose();
  const Eigen::VectorXd preds = exec.predict(flatten_params(params), xs);
  CHECK(preds[0] == doctest::Approx(r.prediction).epsilon(1e-10));
}

TEST_CASE("forward reports the pre-normalization norm") {
  TrainConfig config;
  config.cutoff = 10;
  const CircuitParams zero = zero_circuit_params(2);
  Eigen::VectorXd x(2);
  x << 0.5, -0.5;
  const ForwardResult r = forward(zero, x, config);
  CHECK(r.pre_norm_squared == doctest::Approx(1.0).epsilon(1e-8));
}
