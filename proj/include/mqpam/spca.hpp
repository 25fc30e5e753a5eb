#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "mqpam/dense.hpp"
#include "mqpam/solver.hpp"

namespace mqpam {

/// Sparse PCA model F(X) = -(mu/2) Tr(X^T C X) + ||X||_1 with C = A^T A.
class SpcaInstance {
 public:
  SpcaInstance(Matrix covariance, double mu, Eigen::Index p)
      : covariance_(std::move(covariance)), mu_(mu), p_(p) {
    if (covariance_.rows() != covariance_.cols())
      throw std::invalid_argument("SpcaInstance: covariance must be square");
    if (!(mu_ > 0.0)) throw std::invalid_argument("SpcaInstance: mu must be > 0");
    if (p_ < 1 || n() < p_) throw std::invalid_argument("SpcaInstance: need n >= p >= 1");
    if ((covariance_ - covariance_.transpose()).norm() > 1e-10)
      throw std::invalid_argument("SpcaInstance: covariance is not symmetric");
  }

  const Matrix& covariance() const noexcept { return covariance_; }
  double mu() const noexcept { return mu_; }
  Eigen::Index n() const noexcept { return covariance_.rows(); }
  Eigen::Index p() const noexcept { return p_; }

 private:
  Matrix covariance_;
  double mu_;
  Eigen::Index p_;
};

/// Gaussian A (m x n) from `seed`, covariance C = A^T A formed once.
inline SpcaInstance build_instance(Eigen::Index m, Eigen::Index n, Eigen::Index p,
                                   double mu, std::uint64_t seed) {
  if (m < 1 || p < 1 || n < p)
    throw std::invalid_argument("build_instance: need m >= 1 and n >= p >= 1");
  const Matrix a = gaussian_matrix(m, n, seed);
  Matrix c(n, n);
  c.setZero();
  c.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
  return SpcaInstance(std::move(c), mu, p);
}

inline void check_shape(const SpcaInstance& inst, const Matrix& x, const char* what) {
  if (x.rows() != inst.n() || x.cols() != inst.p())
    throw std::invalid_argument(std::string(what) + ": expected an n x p matrix");
}

/// Smooth part -(mu/2) Tr(X^T C X).
inline double spca_smooth_objective(const SpcaInstance& inst, const Matrix& x) {
  check_shape(inst, x, "spca_smooth_objective");
  return -0.5 * inst.mu() * (x.transpose() * inst.covariance() * x).trace();
}

inline double spca_objective(const SpcaInstance& inst, const Matrix& x) {
  return spca_smooth_objective(inst, x) + x.cwiseAbs().sum();
}

/// -mu C X + beta (X - Y)
inline Matrix spca_euclidean_gradient(const SpcaInstance& inst, const Matrix& x,
                                      const Matrix& y, double beta) {
  check_shape(inst, x, "spca_euclidean_gradient");
  check_shape(inst, y, "spca_euclidean_gradient");
  Matrix g = beta * (x - y);
  g.noalias() -= inst.mu() * (inst.covariance() * x);
  return g;
}

/// Fraction of entries that are exactly zero.
inline double sparsity(const Matrix& y) {
  if (y.size() == 0) return 0.0;
  return static_cast<double>((y.array() == 0.0).count()) / static_cast<double>(y.size());
}

/// Fraction of entries with magnitude below `threshold`.
inline double thresholded_sparsity(const Matrix& x, double threshold = 1e-5) {
  if (x.size() == 0) return 0.0;
  return static_cast<double>((x.array().abs() < threshold).count()) /
         static_cast<double>(x.size());
}

/// The instance captured by reference; it must outlive the returned problem.
inline SmoothProblem make_smooth_problem(const SpcaInstance& inst) {
  SmoothProblem problem;
  problem.euclidean_gradient = [&inst](const Matrix& x, const Matrix& y, double beta) {
    return spca_euclidean_gradient(inst, x, y, beta);
  };
  problem.objective = [&inst](const Matrix& x) { return spca_smooth_objective(inst, x); };
  problem.penalized_objective = [&inst](const Matrix& x, const Matrix& y, double beta) {
    return spca_smooth_objective(inst, x) + 0.5 * beta * (y - x).squaredNorm();
  };
  return problem;
}

}  // namespace mqpam
