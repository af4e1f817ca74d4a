#include "qglm/expm.hpp"

#include <cmath>

#include "qglm/errors.hpp"

namespace qglm {

namespace {

double one_norm(const Eigen::MatrixXcd& m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    best = std::max(best, m.col(j).cwiseAbs().sum());
  }
  return best;
}

}  // namespace

Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) {
    throw ParameterError("matrix_exponential: matrix must be square");
  }
  const Eigen::Index n = a.rows();
  if (!a.allFinite()) {
    throw NumericError("matrix_exponential: non-finite input");
  }
  const double norm = one_norm(a);

  int squarings = 0;
  double scaled_norm = norm;
  while (scaled_norm > 0.5) {
    scaled_norm *= 0.5;
    ++squarings;
  }
  const Eigen::MatrixXcd x = a / std::ldexp(1.0, squarings);

  Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(n, n);
  constexpr double kSeriesTolerance = 1e-14;
  for (int k = 1; k <= 200; ++k) {
    term = (term * x) / static_cast<double>(k);
    result += term;
    if (one_norm(term) < kSeriesTolerance) break;
  }

  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

}  // namespace qglm
