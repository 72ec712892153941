#pragma once

#include <Eigen/Dense>

namespace ragnar {

struct LeastSquaresSolution {
  Eigen::VectorXd coef;
  int rank = 0;
  bool ridge = false;  // rank-deficient design; ridge fallback used
};

/// Ordinary least squares through column-pivoted Householder QR. When the
/// design is rank deficient the normal equations are regularised with
/// lambda = 1e-8 * trace(X'X) / cols and `ridge` is set.
inline LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  LeastSquaresSolution out;
  const Eigen::Index cols = x.cols();
  if (cols == 0) return out;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  out.rank = static_cast<int>(qr.rank());
  if (out.rank == cols) {
    out.coef = qr.solve(y);
    return out;
  }
  const Eigen::MatrixXd gram = x.transpose() * x;
  double lambda = 1e-8 * gram.trace() / static_cast<double>(cols);
  if (!(lambda > 0.0)) lambda = 1e-8;
  Eigen::MatrixXd reg = gram;
  reg.diagonal().array() += lambda;
  out.coef = reg.ldlt().solve(x.transpose() * y);
  out.ridge = true;
  return out;
}

}  // namespace ragnar
