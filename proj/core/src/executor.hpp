#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace qglm::internal {

// One batch panel: real and imaginary parts of up to kTile state vectors,
// stored batch-major as kTile x dim column-major blocks, so each Fock basis
// index owns a contiguous run of kTile observation lanes.
struct Panel {
  Eigen::MatrixXd re;
  Eigen::MatrixXd im;
};

// Batched circuit evaluator used by train/predict. Uses the same circuit
// definition as the reference path in circuit.cpp but specialized for speed
// on a single core:
//   - states split into real/imaginary batch-major panels so every kernel's
//     inner loop runs over the kTile observation lanes of one basis index;
//   - beamsplitters applied blockwise per total photon number of the mode
//     pair (the mixing core is real and block diagonal after the phase
//     rotation is peeled off);
//   - squeezers applied as dense real mixes over digit runs;
//   - rotation and Kerr layers applied as digit-wise phase sweeps;
//   - gradients via reverse sweep over stored forward states with a
//     ping-pong costate panel.
// Workspace buffers persist across calls, so construct one executor per
// training run and reuse it. Not thread safe.
class BatchedExecutor {
 public:
  BatchedExecutor(int num_modes, int cutoff, double encoding_scale);

  Eigen::VectorXd predict(const Eigen::VectorXd& theta,
                          const Eigen::MatrixXd& features);
  double mse(const Eigen::VectorXd& theta, const Eigen::MatrixXd& features,
             const Eigen::VectorXd& targets);
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta,
                           const Eigen::MatrixXd& features,
                           const Eigen::VectorXd& targets,
                           double* mse_out = nullptr);

 private:
  friend struct ExecutorOps;

  int modes_;
  int cutoff_;
  std::int64_t dim_ = 0;
  double scale_;

  // per-cutoff tables
  std::vector<int> block_lo_;
  std::vector<int> block_size_;
  Eigen::MatrixXd w_up_;
  Eigen::MatrixXd w_dn_;
  std::vector<double> sqrt_n_;
  std::vector<double> squeeze_up_;
  std::vector<double> squeeze_dn_;
  std::vector<double> linear_weight_;
  std::unordered_map<double, Eigen::VectorXd> coherent_cache_;

  // workspace
  std::vector<Panel> states_;
  Panel mu_;
  Panel mu_tmp_;
  Panel ping_a_;
  Panel ping_b_;
  std::vector<double> gather_r_;
  std::vector<double> gather_i_;
  std::vector<double> kron_a_;
  std::vector<double> kron_b_;
};

}  // namespace qglm::internal
