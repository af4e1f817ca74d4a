#include "qglm/gates.hpp"

#include <cmath>

#include "qglm/errors.hpp"
#include "qglm/expm.hpp"

namespace qglm {

namespace {

void check_cutoff(int cutoff) {
  if (cutoff < 2) throw ParameterError("gates: cutoff must be at least 2");
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd annihilation_operator(int cutoff) {
  check_cutoff(cutoff);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

GateMatrix displacement_gate(std::complex<double> alpha, int cutoff) {
  check_cutoff(cutoff);
  const Eigen::MatrixXcd a = annihilation_operator(cutoff);
  const Eigen::MatrixXcd generator =
      alpha * a.adjoint() - std::conj(alpha) * a;
  return GateMatrix{1, cutoff, matrix_exponential(generator)};
}

GateMatrix squeezing_gate(double r, int cutoff) {
  check_cutoff(cutoff);
  const Eigen::MatrixXcd a = annihilation_operator(cutoff);
  const Eigen::MatrixXcd generator =
      0.5 * r * (a * a - (a * a).adjoint());
  return GateMatrix{1, cutoff, matrix_exponential(generator)};
}

GateMatrix rotation_gate(double phi, int cutoff) {
  check_cutoff(cutoff);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(cutoff, cutoff);
  for (int n = 0; n < cutoff; ++n) {
    u(n, n) = std::polar(1.0, n * phi);
  }
  return GateMatrix{1, cutoff, u};
}

GateMatrix kerr_gate(double kappa, int cutoff) {
  check_cutoff(cutoff);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(cutoff, cutoff);
  for (int n = 0; n < cutoff; ++n) {
    u(n, n) = std::polar(1.0, kappa * static_cast<double>(n) * n);
  }
  return GateMatrix{1, cutoff, u};
}

GateMatrix beamsplitter_gate(double theta, double phi, int cutoff) {
  check_cutoff(cutoff);
  const Eigen::MatrixXcd a = annihilation_operator(cutoff);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(cutoff, cutoff);
  const Eigen::MatrixXcd cross = kron(a.adjoint(), a);
  const Eigen::MatrixXcd generator =
      theta * (std::polar(1.0, phi) * cross -
               std::polar(1.0, -phi) * cross.adjoint());
  return GateMatrix{2, cutoff, matrix_exponential(generator)};
}

InterferometerParams zero_interferometer(int num_modes) {
  if (num_modes < 1) {
    throw ParameterError("zero_interferometer: num_modes must be at least 1");
  }
  const int pairs = num_modes * (num_modes - 1) / 2;
  InterferometerParams params;
  params.num_modes = num_modes;
  params.bs_thetas = Eigen::VectorXd::Zero(pairs);
  params.bs_phis = Eigen::VectorXd::Zero(pairs);
  params.final_phases = Eigen::VectorXd::Zero(num_modes);
  return params;
}

std::vector<std::pair<int, int>> interferometer_pairs(int num_modes) {
  if (num_modes < 1) {
    throw ParameterError("interferometer_pairs: num_modes must be at least 1");
  }
  std::vector<std::pair<int, int>> pairs;
  for (int layer = 0; layer < num_modes; ++layer) {
    for (int p = layer % 2; p + 1 < num_modes; p += 2) {
      pairs.emplace_back(p, p + 1);
    }
  }
  return pairs;
}

GateSchedule interferometer_schedule(const InterferometerParams& params,
                                     int cutoff) {
  check_cutoff(cutoff);
  const auto pairs = interferometer_pairs(params.num_modes);
  const auto expected = static_cast<Eigen::Index>(pairs.size());
  if (params.bs_thetas.size() != expected ||
      params.bs_phis.size() != expected) {
    throw ParameterError(
        "interferometer_schedule: need num_modes*(num_modes-1)/2 beamsplitter "
        "angles");
  }
  if (params.final_phases.size() != params.num_modes) {
    throw ParameterError(
        "interferometer_schedule: need one final phase per mode");
  }

  GateSchedule schedule;
  schedule.gates.reserve(pairs.size() + params.num_modes);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    schedule.gates.push_back(
        {beamsplitter_gate(params.bs_thetas[k], params.bs_phis[k], cutoff),
         {pairs[k].first, pairs[k].second}});
  }
  for (int m = 0; m < params.num_modes; ++m) {
    schedule.gates.push_back({rotation_gate(params.final_phases[m], cutoff), {m}});
  }
  return schedule;
}

FockState apply_schedule(const FockState& state, const GateSchedule& schedule) {
  FockState out = state;
  for (const auto& entry : schedule.gates) {
    out = apply_gate(out, entry.gate, entry.modes);
  }
  return out;
}

}  // namespace qglm
