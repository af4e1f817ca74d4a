#pragma once

#include <Eigen/Dense>

namespace qglm {

// Dense matrix exponential by scaling-and-squaring with a Taylor series.
// The argument is scaled down by powers of two until its 1-norm is at most
// 0.5, the series is summed until the next term's 1-norm drops below 1e-14,
// and the result is squared back up.
Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& a);

}  // namespace qglm
