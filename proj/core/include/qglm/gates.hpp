#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qglm/fock_state.hpp"

namespace qglm {

// Annihilation operator a in the truncated basis: a[n-1, n] = sqrt(n).
Eigen::MatrixXd annihilation_operator(int cutoff);

// All continuous gates below are built as exp(G) of the truncated
// anti-Hermitian generator G, so every matrix is exactly unitary on the
// truncated space. Gates whose generator commutes with the photon number
// (rotation, Kerr) are constructed directly as diagonal phases.

// exp(alpha a\dagger - conj(alpha) a)
GateMatrix displacement_gate(std::complex<double> alpha, int cutoff);

// exp((r/2)(a a - a\dagger a\dagger))
GateMatrix squeezing_gate(double r, int cutoff);

// diag(exp(i n phi))
GateMatrix rotation_gate(double phi, int cutoff);

// diag(exp(i kappa n^2))
GateMatrix kerr_gate(double kappa, int cutoff);

// Two-mode beamsplitter exp(theta (e^{i phi} a\dagger b - e^{-i phi} a b\dagger)),
// where a acts on the first listed mode and b on the second.
GateMatrix beamsplitter_gate(double theta, double phi, int cutoff);

// Parameters of one rectangular interferometer mesh on num_modes modes:
// one (theta, phi) pair per beamsplitter in mesh order, then one final
// rotation phase per mode. The mesh has num_modes*(num_modes-1)/2
// beamsplitters. All-zero parameters give the identity.
struct InterferometerParams {
  int num_modes = 0;
  Eigen::VectorXd bs_thetas;
  Eigen::VectorXd bs_phis;
  Eigen::VectorXd final_phases;
};

InterferometerParams zero_interferometer(int num_modes);

// Mode pairs of the rectangular mesh in application order. Layer L couples
// (p, p+1) for p = L%2, L%2 + 2, ... across num_modes layers, which yields
// exactly num_modes*(num_modes-1)/2 pairs.
std::vector<std::pair<int, int>> interferometer_pairs(int num_modes);

// One gate application in a fixed sequence.
struct ScheduledGate {
  GateMatrix gate;
  std::vector<int> modes;
};

struct GateSchedule {
  std::vector<ScheduledGate> gates;
};

// Beamsplitters in mesh order followed by the per-mode final rotations.
GateSchedule interferometer_schedule(const InterferometerParams& params,
                                     int cutoff);

FockState apply_schedule(const FockState& state, const GateSchedule& schedule);

}  // namespace qglm
