#pragma once

// Independent reference computations used by the tests. None of these go
// through the library's SVD path.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Pseudo-inverse from the eigen-decomposition of A A^T (rows <= cols):
// A = U S V^T with U, S^2 from A A^T and V = A^T U S^-1. Eigenvalues of
// A A^T carry absolute error near eps * lmax, so the cutoff is on sigma and
// must sit well above sqrt(eps).
inline Eigen::MatrixXd pinv_from_triples(const Eigen::MatrixXd& A, double rel_tol = 1e-6) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A * A.transpose());
  const Eigen::VectorXd lam = es.eigenvalues();
  const double lmax = lam.cwiseAbs().maxCoeff();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(A.cols(), A.rows());
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam[k] <= rel_tol * rel_tol * lmax) continue;
    const double s = std::sqrt(lam[k]);
    const Eigen::VectorXd u = es.eigenvectors().col(k);
    const Eigen::VectorXd v = A.transpose() * u / s;
    P += v * u.transpose() / s;
  }
  return P;
}

// Minimizer of |A K - F|^2 + alpha |B (K - ref)|^2 + ridge |K|^2, as a
// Householder QR least-squares solve of the stacked system. Forming the normal
// equations would square the conditioning.
inline Eigen::VectorXd ridge_w2(const Eigen::MatrixXd& A, const Eigen::VectorXd& F,
                                const std::vector<std::uint8_t>& mask, double ref, double alpha,
                                double ridge) {
  const Eigen::Index L = A.cols();
  Eigen::VectorXd b(L);
  for (Eigen::Index i = 0; i < L; ++i) b[i] = mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  const Eigen::Index R = A.rows();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(R + 2 * L, L);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(R + 2 * L);
  M.topRows(R) = A;
  rhs.head(R) = F;
  M.middleRows(R, L).diagonal() = std::sqrt(alpha) * b;
  rhs.segment(R, L) = std::sqrt(alpha) * ref * b;
  M.bottomRows(L).diagonal().setConstant(std::sqrt(ridge));
  return M.householderQr().solve(rhs);
}

// Closed-form Tikhonov on A = diag(a), penalty |K|^2.
inline Eigen::VectorXd diag_tikhonov(const Eigen::VectorXd& a, const Eigen::VectorXd& F,
                                     double alpha) {
  return (F.array() * a.array() / (a.array().square() + alpha)).matrix();
}

// Three-point circumcircle curvature, written out independently.
inline double circle_curvature(double x1, double y1, double x2, double y2, double x3,
                               double y3) {
  const double a = std::hypot(x2 - x1, y2 - y1);
  const double b = std::hypot(x3 - x2, y3 - y2);
  const double c = std::hypot(x3 - x1, y3 - y1);
  const double area2 = (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1);
  return 2.0 * area2 / (a * b * c);
}

}  // namespace oracle
