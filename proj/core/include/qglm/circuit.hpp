#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qglm/dataset.hpp"
#include "qglm/fock_state.hpp"
#include "qglm/gates.hpp"

namespace qglm {

// Trainable parameters of the photonic regression circuit:
// interferometer 1, one squeezer per mode, interferometer 2, one Kerr gate
// per mode. The flat layout used by flatten_params/unflatten_params (and by
// gradient vectors, model files and the initializer) is
//
//   [i1.bs_thetas, i1.bs_phis, i1.final_phases, squeeze_r,
//    i2.bs_thetas, i2.bs_phis, i2.final_phases, kerr_kappa]
//
// which has 4P + 4M entries for P = M(M-1)/2 beamsplitters (40 when M = 4).
struct CircuitParams {
  InterferometerParams interferometer_1;
  Eigen::VectorXd squeeze_r;
  InterferometerParams interferometer_2;
  Eigen::VectorXd kerr_kappa;
};

int num_circuit_params(int num_modes);
CircuitParams zero_circuit_params(int num_modes);
Eigen::VectorXd flatten_params(const CircuitParams& params);
CircuitParams unflatten_params(const Eigen::VectorXd& theta, int num_modes);

// One name per flat parameter, in flat order (used by the model file).
std::vector<std::string> param_names(int num_modes);

struct TrainConfig {
  int cutoff = 10;
  double encoding_scale = 0.5;
  double learning_rate = 0.1;
  int iterations = 80;
  int repeats = 10;
  std::uint64_t seed = 1;
};

// Feature encoding: one displacement per mode with real amplitude
// encoding_scale * features[k] applied to the vacuum. Features must have
// one entry per mode with magnitude at most 3.5.
FockState encode_features(const Eigen::VectorXd& features, int cutoff,
                          double encoding_scale);

struct ForwardResult {
  double prediction;
  // Squared norm of the truncated state just before the single normalize.
  // forward() throws NumericError when the norm falls below 0.5 (squared
  // norm below 0.25), which signals that the cutoff is too small.
  double pre_norm_squared;
};

// Full circuit: encode, interferometer 1, squeezers, interferometer 2, Kerr
// layer, one normalize, then the mode-0 quadrature expectation.
ForwardResult forward(const CircuitParams& params,
                      const Eigen::VectorXd& features,
                      const TrainConfig& config);

// Gradient of the mean squared error over a batch with respect to the flat
// parameter vector, computed by the adjoint method (one forward and one
// backward sweep per observation, no finite differences). Optionally also
// reports the batch MSE.
Eigen::VectorXd gradient(const CircuitParams& params,
                         const Eigen::MatrixXd& features,
                         const Eigen::VectorXd& targets,
                         const TrainConfig& config,
                         double* mse_out = nullptr);

struct TrainResult {
  CircuitParams params;
  // Entry t is the training MSE before update t; the last entry is the MSE
  // after the final update, so the vector has iterations + 1 entries.
  std::vector<double> loss_trace;
};

// Full-batch gradient descent on the train split of the dataset, starting
// from parameters drawn uniformly from [-0.05, 0.05] with the config seed.
TrainResult train(const Dataset& dataset, const TrainConfig& config);

// Batched prediction for each feature row (same math as forward()).
Eigen::VectorXd predict_batch(const CircuitParams& params,
                              const Eigen::MatrixXd& features,
                              const TrainConfig& config);

struct RepeatedEvaluation {
  double mean_test_mse = 0.0;
  std::vector<double> per_repeat_mse;
  std::vector<CircuitParams> per_repeat_params;
};

// Trains `repeats` times with seeds seed, seed+1, ..., evaluates each fit on
// the test split, and reports the arithmetic mean of the test MSEs.
RepeatedEvaluation evaluate_repeated(const Dataset& dataset,
                                     const TrainConfig& config);

struct SavedModel {
  CircuitParams params;
  int num_modes = 0;
  int cutoff = 0;
  double encoding_scale = 0.5;
};

// Plain-text model file: one header line with the shape, then one
// "name = value" line per flat parameter at 17 significant digits.
void save_model(const SavedModel& model, const std::string& path);
SavedModel load_model(const std::string& path);

}  // namespace qglm
