#include "crshare/linalg.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace crshare {

bool is_symmetric(const Matrix& m, double tolerance) {
  const std::size_t n = m.size();
  for (const auto& row : m) {
    if (row.size() != n) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(m[i][j] - m[j][i]) > tolerance) return false;
    }
  }
  return true;
}

std::optional<Matrix> psd_factor(const Matrix& m, double tolerance) {
  if (!is_symmetric(m)) return std::nullopt;
  const auto n = static_cast<Eigen::Index>(m.size());
  if (n == 0) return Matrix{};

  Eigen::MatrixXd a(n, n);
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = m[i][j];
      scale = std::max(scale, std::abs(a(i, j)));
    }
  }
  if (scale == 0.0) return Matrix(m.size(), std::vector<double>(m.size(), 0.0));

  // P^T L D L^T P = A with pivoting, so F = P^T L sqrt(D).
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  Eigen::VectorXd d = ldlt.vectorD();
  if (d.minCoeff() < -tolerance * scale) return std::nullopt;
  d = d.cwiseMax(0.0).cwiseSqrt();

  Eigen::MatrixXd l = ldlt.matrixL();
  Eigen::MatrixXd f = ldlt.transpositionsP().transpose() * (l * d.asDiagonal());

  // LDLT accepts some indefinite inputs when pivots vanish; verify.
  if (!(f * f.transpose()).isApprox(a, 1e-8) &&
      ((f * f.transpose()) - a).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    return std::nullopt;
  }

  Matrix out(m.size(), std::vector<double>(m.size(), 0.0));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out[i][j] = f(i, j);
  }
  return out;
}

}  // namespace crshare
