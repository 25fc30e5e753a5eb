#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "mqpam/dense.hpp"

namespace mqpam {

/// ||X^T X - I_p||_F.
inline double feasibility_gap(const Matrix& x) {
  if (x.rows() < x.cols())
    throw std::invalid_argument("feasibility_gap: need rows >= cols");
  return (x.transpose() * x - Matrix::Identity(x.cols(), x.cols())).norm();
}

inline Matrix sym_part(const Matrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("sym_part: matrix must be square");
  return 0.5 * (m + m.transpose());
}

inline Matrix skew_part(const Matrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("skew_part: matrix must be square");
  return 0.5 * (m - m.transpose());
}

/// A point on St(n, p): an n x p matrix with orthonormal columns.
class StiefelPoint {
 public:
  static constexpr double kFeasibilityTol = 1e-8;

  explicit StiefelPoint(Matrix value) : value_(std::move(value)) {
    if (value_.cols() < 1 || value_.rows() < value_.cols())
      throw std::invalid_argument("StiefelPoint: need n >= p >= 1");
    if (!all_finite(value_))
      throw NumericalError("StiefelPoint: non-finite entries");
    const double gap = feasibility_gap(value_);
    if (gap > kFeasibilityTol)
      throw NumericalError("StiefelPoint: feasibility gap " +
                           detail::sci(gap) + " exceeds tolerance");
  }

  const Matrix& value() const noexcept { return value_; }
  Eigen::Index n() const noexcept { return value_.rows(); }
  Eigen::Index p() const noexcept { return value_.cols(); }

 private:
  Matrix value_;
};

/// A direction V in the tangent space at `base`, i.e. X^T V + V^T X = 0.
class TangentVector {
 public:
  static constexpr double kTangencyTol = 1e-8;

  TangentVector(StiefelPoint base, Matrix direction)
      : base_(std::move(base)), direction_(std::move(direction)) {
    if (direction_.rows() != base_.n() || direction_.cols() != base_.p())
      throw std::invalid_argument("TangentVector: shape mismatch with base");
    const double gap = tangency_gap();
    if (!(gap <= kTangencyTol))
      throw NumericalError("TangentVector: tangency gap " +
                           detail::sci(gap) + " exceeds tolerance");
  }

  const StiefelPoint& base() const noexcept { return base_; }
  const Matrix& direction() const noexcept { return direction_; }

  double tangency_gap() const {
    const Matrix xtv = base_.value().transpose() * direction_;
    return (xtv + xtv.transpose()).norm();
  }

  /// Skips the tangency check; only for directions that are tangent by
  /// construction.
  static TangentVector from_projection(StiefelPoint base, Matrix direction) {
    return TangentVector(std::move(base), std::move(direction), Unchecked{});
  }

  /// t * V; the tangent space is a linear subspace.
  TangentVector scaled(double t) const {
    return TangentVector(base_, t * direction_, Unchecked{});
  }

 private:
  struct Unchecked {};
  TangentVector(StiefelPoint base, Matrix direction, Unchecked)
      : base_(std::move(base)), direction_(std::move(direction)) {}

  StiefelPoint base_;
  Matrix direction_;
};

/// Orthogonal projection onto T_X St(n, p) under the Euclidean metric:
/// G - X sym(X^T G).
inline TangentVector tangent_project(const StiefelPoint& x, const Matrix& g) {
  if (g.rows() != x.n() || g.cols() != x.p())
    throw std::invalid_argument("tangent_project: shape mismatch");
  const Matrix& xv = x.value();
  Matrix v = g - xv * sym_part(xv.transpose() * g);
  return TangentVector::from_projection(x, std::move(v));
}

/// Polar retraction, the orthonormal polar factor of X + V:
/// (X + V)((X + V)^T (X + V))^{-1/2}. For feasible X and tangent V the Gram
/// matrix equals I_p + V^T V; forming it from X + V keeps rounding-level
/// feasibility error from compounding across steps.
inline StiefelPoint retract_polar(const TangentVector& v) {
  const Matrix& d = v.direction();
  if (!all_finite(d))
    throw NumericalError("retract_polar: non-finite tangent direction");
  const Matrix moved = v.base().value() + d;
  const Matrix product = moved.transpose() * moved;
  const Matrix gram = 0.5 * (product + product.transpose());
  return StiefelPoint(moved * spd_inverse_sqrt(gram));
}

inline StiefelPoint retract_polar(const StiefelPoint& x,
                                  const TangentVector& v) {
  if (v.base().value() != x.value())
    throw std::invalid_argument("retract_polar: tangent vector based elsewhere");
  return retract_polar(v);
}

/// Orthonormalized Gaussian matrix; deterministic per seed.
inline StiefelPoint random_point(Eigen::Index n, Eigen::Index p,
                                 std::uint64_t seed) {
  if (p < 1 || n < p)
    throw std::invalid_argument("random_point: need n >= p >= 1");
  return StiefelPoint(qr_orthonormal(gaussian_matrix(n, p, seed)));
}

}  // namespace mqpam
