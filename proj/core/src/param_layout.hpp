#pragma once

#include "qglm/errors.hpp"

namespace qglm::internal {

// Offsets of each parameter group inside the flat circuit parameter vector.
// Must stay in sync with flatten_params/unflatten_params.
struct ParamLayout {
  int modes = 0;
  int pairs = 0;
  int total = 0;
  int i1_theta = 0, i1_phi = 0, i1_phase = 0;
  int squeeze = 0;
  int i2_theta = 0, i2_phi = 0, i2_phase = 0;
  int kerr = 0;
};

inline ParamLayout layout_for(int num_modes) {
  if (num_modes < 1) {
    throw ParameterError("circuit: num_modes must be at least 1");
  }
  ParamLayout l;
  l.modes = num_modes;
  l.pairs = num_modes * (num_modes - 1) / 2;
  l.i1_theta = 0;
  l.i1_phi = l.pairs;
  l.i1_phase = 2 * l.pairs;
  l.squeeze = 2 * l.pairs + num_modes;
  l.i2_theta = 2 * l.pairs + 2 * num_modes;
  l.i2_phi = l.i2_theta + l.pairs;
  l.i2_phase = l.i2_theta + 2 * l.pairs;
  l.kerr = l.i2_phase + num_modes;
  l.total = 4 * l.pairs + 4 * num_modes;
  return l;
}

}  // namespace qglm::internal
