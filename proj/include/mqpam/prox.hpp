#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "mqpam/dense.hpp"

namespace mqpam {

/// Positive proximal / smoothing parameter mu.
class ProxParameter {
 public:
  explicit ProxParameter(double mu) : mu_(mu) {
    if (!(mu > 0.0) || !std::isfinite(mu))
      throw std::invalid_argument("ProxParameter: mu must be positive and finite");
  }
  double mu() const noexcept { return mu_; }

 private:
  double mu_;
};

/// Proximal map U -> prox_{mu g}(U) for some regularizer g.
using ProxOperator = std::function<Matrix(const Matrix&, ProxParameter)>;

/// sgn(U) .* max(|U| - tau, 0). Entries with |u| <= tau come out as +0.0.
inline Matrix soft_threshold(const Matrix& u, double tau) {
  if (!(tau >= 0.0))
    throw std::invalid_argument("soft_threshold: tau must be nonnegative");
  return u.unaryExpr([tau](double v) {
    const double a = std::abs(v);
    if (a <= tau) return 0.0;
    return std::copysign(a - tau, v);
  });
}

inline Matrix prox_l1(const Matrix& u, ProxParameter param) {
  return soft_threshold(u, param.mu());
}

/// Moreau envelope of the l1 norm, i.e. the Huber sum.
inline double moreau_envelope_l1(const Matrix& u, ProxParameter param) {
  const double mu = param.mu();
  double total = 0.0;
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double a = std::abs(u(i, j));
      total += a <= mu ? a * a / (2.0 * mu) : a - 0.5 * mu;
    }
  }
  return total;
}

/// Gradient of the envelope, (U - prox(U)) / mu.
inline Matrix moreau_envelope_l1_gradient(const Matrix& u, ProxParameter param) {
  return (u - prox_l1(u, param)) / param.mu();
}

inline const ProxOperator& l1_prox() {
  static const ProxOperator op = [](const Matrix& u, ProxParameter param) {
    return prox_l1(u, param);
  };
  return op;
}

}  // namespace mqpam
