#include "qglm/fock_state.hpp"

#include <cmath>

#include "qglm/errors.hpp"

namespace qglm {

namespace {

void check_state(const FockState& state) {
  if (state.num_modes < 1) {
    throw ParameterError("fock: num_modes must be at least 1");
  }
  if (state.cutoff < 2) {
    throw ParameterError("fock: cutoff must be at least 2");
  }
  const std::int64_t dim = fock_stride(state.cutoff, state.num_modes);
  if (state.amplitudes.size() != dim) {
    throw ParameterError("fock: amplitude vector has wrong length");
  }
}

void check_normalized(const FockState& state) {
  if (std::abs(norm_squared(state) - 1.0) > 1e-6) {
    throw ParameterError("fock: state must be normalized");
  }
}

}  // namespace

std::int64_t fock_stride(int cutoff, int exponent) {
  std::int64_t out = 1;
  for (int k = 0; k < exponent; ++k) out *= cutoff;
  return out;
}

FockState vacuum_state(int num_modes, int cutoff) {
  if (num_modes < 1) {
    throw ParameterError("vacuum_state: num_modes must be at least 1");
  }
  if (cutoff < 2) {
    throw ParameterError("vacuum_state: cutoff must be at least 2");
  }
  FockState state;
  state.num_modes = num_modes;
  state.cutoff = cutoff;
  state.amplitudes = Eigen::VectorXcd::Zero(fock_stride(cutoff, num_modes));
  state.amplitudes[0] = 1.0;
  return state;
}

FockState apply_gate(const FockState& state, const GateMatrix& gate,
                     const std::vector<int>& modes) {
  check_state(state);
  if (gate.cutoff != state.cutoff) {
    throw ParameterError("apply_gate: gate and state cutoffs differ");
  }
  if (gate.arity != 1 && gate.arity != 2) {
    throw ParameterError("apply_gate: gate arity must be 1 or 2");
  }
  if (static_cast<int>(modes.size()) != gate.arity) {
    throw ParameterError("apply_gate: mode list does not match gate arity");
  }
  for (int m : modes) {
    if (m < 0 || m >= state.num_modes) {
      throw ParameterError("apply_gate: mode index out of range");
    }
  }

  const int c = state.cutoff;
  const std::int64_t dim = state.amplitudes.size();
  FockState out = state;

  if (gate.arity == 1) {
    if (gate.entries.rows() != c || gate.entries.cols() != c) {
      throw ParameterError("apply_gate: one-mode gate must be cutoff x cutoff");
    }
    const std::int64_t s = fock_stride(c, modes[0]);
    const std::int64_t block = s * c;
    Eigen::VectorXcd in(c);
    for (std::int64_t high = 0; high < dim; high += block) {
      for (std::int64_t low = 0; low < s; ++low) {
        const std::int64_t base = high + low;
        for (int n = 0; n < c; ++n) in[n] = state.amplitudes[base + n * s];
        const Eigen::VectorXcd res = gate.entries * in;
        for (int n = 0; n < c; ++n) out.amplitudes[base + n * s] = res[n];
      }
    }
    return out;
  }

  if (modes[0] == modes[1]) {
    throw ParameterError("apply_gate: two-mode gate needs distinct modes");
  }
  const std::int64_t d2 = static_cast<std::int64_t>(c) * c;
  if (gate.entries.rows() != d2 || gate.entries.cols() != d2) {
    throw ParameterError("apply_gate: two-mode gate must be cutoff^2 square");
  }
  const std::int64_t sa = fock_stride(c, modes[0]);
  const std::int64_t sb = fock_stride(c, modes[1]);
  Eigen::VectorXcd in(d2);
  for (std::int64_t i = 0; i < dim; ++i) {
    if ((i / sa) % c != 0 || (i / sb) % c != 0) continue;
    for (int na = 0; na < c; ++na) {
      for (int nb = 0; nb < c; ++nb) {
        in[na * c + nb] = state.amplitudes[i + na * sa + nb * sb];
      }
    }
    const Eigen::VectorXcd res = gate.entries * in;
    for (int na = 0; na < c; ++na) {
      for (int nb = 0; nb < c; ++nb) {
        out.amplitudes[i + na * sa + nb * sb] = res[na * c + nb];
      }
    }
  }
  return out;
}

double norm_squared(const FockState& state) {
  return state.amplitudes.squaredNorm();
}

FockState normalize(const FockState& state) {
  const double n2 = norm_squared(state);
  if (n2 < 1e-12) {
    throw NumericError("normalize: state norm is numerically zero");
  }
  FockState out = state;
  out.amplitudes /= std::sqrt(n2);
  return out;
}

double expectation_x(const FockState& state, int mode) {
  check_state(state);
  if (mode < 0 || mode >= state.num_modes) {
    throw ParameterError("expectation_x: mode index out of range");
  }
  check_normalized(state);
  const int c = state.cutoff;
  const std::int64_t s = fock_stride(c, mode);
  const std::int64_t dim = state.amplitudes.size();
  double acc = 0.0;
  for (std::int64_t i = 0; i < dim; ++i) {
    const int n = static_cast<int>((i / s) % c);
    if (n + 1 >= c) continue;
    acc += std::sqrt(static_cast<double>(n + 1)) *
           std::real(std::conj(state.amplitudes[i]) * state.amplitudes[i + s]);
  }
  return 2.0 * acc;
}

Eigen::VectorXd photon_number_distribution(const FockState& state, int mode) {
  check_state(state);
  if (mode < 0 || mode >= state.num_modes) {
    throw ParameterError("photon_number_distribution: mode index out of range");
  }
  check_normalized(state);
  const int c = state.cutoff;
  const std::int64_t s = fock_stride(c, mode);
  Eigen::VectorXd probabilities = Eigen::VectorXd::Zero(c);
  for (std::int64_t i = 0; i < state.amplitudes.size(); ++i) {
    probabilities[(i / s) % c] += std::norm(state.amplitudes[i]);
  }
  return probabilities;
}

}  // namespace qglm
