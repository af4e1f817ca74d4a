#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace qglm {

// State of num_modes bosonic modes in the Fock basis truncated at `cutoff`
// photons per mode (occupation numbers 0 .. cutoff-1).
//
// Amplitudes are stored as one flat dense vector of length cutoff^num_modes.
// Index i encodes the occupation of mode k as digit k of i written in base
// `cutoff`, so mode 0 is the least significant digit:
//
//   n_k(i) = (i / cutoff^k) % cutoff
//
// Mode k therefore has stride cutoff^k in the flat vector.
struct FockState {
  int num_modes = 0;
  int cutoff = 0;
  Eigen::VectorXcd amplitudes;
};

// Dense matrix of a one- or two-mode gate in the truncated Fock basis.
// A one-mode gate is cutoff x cutoff. A two-mode gate is cutoff^2 x cutoff^2
// with row/column index (n_first * cutoff + n_second), where `first` is the
// first entry of the mode list passed to apply_gate.
struct GateMatrix {
  int arity = 1;
  int cutoff = 0;
  Eigen::MatrixXcd entries;
};

// cutoff^exponent as a flat-index stride.
std::int64_t fock_stride(int cutoff, int exponent);

// |0...0> with amplitude 1 on index 0.
FockState vacuum_state(int num_modes, int cutoff);

// Applies `gate` to the listed modes by contracting the matrix against the
// corresponding tensor axes. Modes must be distinct and in range, and the
// gate's cutoff and arity must match. All other axes are untouched.
FockState apply_gate(const FockState& state, const GateMatrix& gate,
                     const std::vector<int>& modes);

// Sum of squared amplitude magnitudes.
double norm_squared(const FockState& state);

// Rescales to unit norm. Throws NumericError if norm_squared < 1e-12.
FockState normalize(const FockState& state);

// Expectation of the position quadrature x = a + a\dagger of one mode
// (hbar = 2 units). The state must be normalized to within 1e-6.
double expectation_x(const FockState& state, int mode);

// Marginal photon-number distribution of one mode: entry n is the total
// probability of finding n photons there. The state must be normalized to
// within 1e-6.
Eigen::VectorXd photon_number_distribution(const FockState& state, int mode);

}  // namespace qglm
