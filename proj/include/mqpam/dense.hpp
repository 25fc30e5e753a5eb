#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mqpam {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a numerical routine meets input it cannot process
/// (rank deficiency, non-finite values, singular retraction argument).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace detail

/// Frobenius inner product <A, B> = Tr(A^T B).
inline double inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("inner: shape mismatch");
  return (a.array() * b.array()).sum();
}

/// i.i.d. standard normal entries drawn from std::mt19937_64.
/// Entries are filled column by column; the result is bitwise
/// reproducible for a fixed (rows, cols, seed) on one toolchain.
inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                              std::uint64_t seed) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("gaussian_matrix: rows and cols must be >= 1");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(gen);
  return m;
}

/// Thin Householder QR; returns the n x p factor with orthonormal columns.
/// Column signs are normalized so that R has a nonnegative diagonal.
inline Matrix qr_orthonormal(const Matrix& m, double rank_tol = 1e-12) {
  const auto n = m.rows();
  const auto p = m.cols();
  if (p < 1 || n < p)
    throw std::invalid_argument("qr_orthonormal: need rows >= cols >= 1");
  if (!all_finite(m))
    throw NumericalError("qr_orthonormal: non-finite input");

  Eigen::HouseholderQR<Matrix> qr(m);
  const Matrix r = qr.matrixQR().topLeftCorner(p, p)
                       .triangularView<Eigen::Upper>();
  Matrix q = qr.householderQ() * Matrix::Identity(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double d = r(j, j);
    if (std::abs(d) < rank_tol)
      throw NumericalError("qr_orthonormal: rank-deficient input (|R(" +
                           std::to_string(j) + "," + std::to_string(j) +
                           ")| < tol)");
    if (d < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

/// S^{-1/2} for symmetric positive definite S via S = Q diag(l) Q^T.
inline Matrix spd_inverse_sqrt(const Matrix& s, double sym_tol = 1e-12,
                               double eig_floor = 1e-14) {
  if (s.rows() != s.cols() || s.rows() < 1)
    throw std::invalid_argument("spd_inverse_sqrt: matrix must be square");
  if (!all_finite(s))
    throw NumericalError("spd_inverse_sqrt: non-finite input");
  const double asym = (s - s.transpose()).norm();
  if (asym > sym_tol * std::max(1.0, s.norm()))
    throw NumericalError("spd_inverse_sqrt: asymmetry " +
                         detail::sci(asym) + " exceeds tolerance");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  if (eig.info() != Eigen::Success)
    throw NumericalError("spd_inverse_sqrt: eigendecomposition failed");
  const Vector& lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= eig_floor)
    throw NumericalError("spd_inverse_sqrt: eigenvalue " +
                         detail::sci(lambda.minCoeff()) +
                         " is not positive; argument is numerically singular");
  const Matrix& q = eig.eigenvectors();
  Matrix r = q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  // symmetrize away rounding
  return 0.5 * (r + r.transpose());
}

}  // namespace mqpam
