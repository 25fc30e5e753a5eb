#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mqpam/dense.hpp"
#include "mqpam/prox.hpp"
#include "mqpam/stiefel.hpp"

namespace mqpam {

struct SolverConfig {
  double eta = 1e-2;         // RGD step size
  double beta = 100.5;       // penalty weight
  int max_outer = 1000;
  int rgd_iters = 100;
  double tol_grad = 1e-8;    // inner stop on the Riemannian gradient norm
  double tol_rel = 1e-5;     // outer stop on the relative change of X
  std::uint64_t seed = 0;
  bool check_feasibility = false;  // assert the feasibility gap each inner step
  bool record_inner_trace = false;

  void validate() const {
    if (!(eta > 0.0)) throw std::invalid_argument("SolverConfig: eta must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("SolverConfig: beta must be > 0");
    if (max_outer < 1) throw std::invalid_argument("SolverConfig: max_outer must be >= 1");
    if (rgd_iters < 1) throw std::invalid_argument("SolverConfig: rgd_iters must be >= 1");
    if (!(tol_grad >= 0.0)) throw std::invalid_argument("SolverConfig: tol_grad must be >= 0");
    if (!(tol_rel >= 0.0)) throw std::invalid_argument("SolverConfig: tol_rel must be >= 0");
  }
};

/// Smooth part f of the split problem together with the penalized
/// X-subproblem f(X) + (beta/2)||Y - X||^2.
struct SmoothProblem {
  /// grad f(X) + beta (X - Y)
  std::function<Matrix(const Matrix& x, const Matrix& y, double beta)> euclidean_gradient;
  /// f(X)
  std::function<double(const Matrix& x)> objective;
  /// f(X) + (beta/2)||Y - X||_F^2
  std::function<double(const Matrix& x, const Matrix& y, double beta)> penalized_objective;
};

/// The nonsmooth term g: its proximal map and, optionally, its value.
struct Regularizer {
  ProxOperator prox;
  std::function<double(const Matrix&)> value;

  static Regularizer l1() {
    return {l1_prox(), [](const Matrix& m) { return m.cwiseAbs().sum(); }};
  }
};

enum class Termination { kRelativeChange, kMaxOuter };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kRelativeChange: return "relative-change";
    case Termination::kMaxOuter: return "max-outer";
  }
  return "unknown";
}

struct SolveResult {
  SolveResult(StiefelPoint x, Matrix y) : x_final(std::move(x)), y_final(std::move(y)) {}

  StiefelPoint x_final;
  Matrix y_final;
  int outer_iterations = 0;
  std::vector<double> objective_trace;   // F(X_k), one entry per outer iteration
  std::vector<double> inner_trace;       // penalized objective per inner step (debug)
  double rel_change_final = 0.0;
  double wall_time_seconds = 0.0;
  Termination termination = Termination::kMaxOuter;
};

/// Per-outer-iteration snapshot handed to an observer.
struct OuterIterate {
  int k;
  const Matrix& x;
  const Matrix& y;
  double rel_change;
};

using OuterObserver = std::function<void(const OuterIterate&)>;

/// ||x_new - x_old||_F / ||x_new||_F.
inline double relative_change(const Matrix& x_new, const Matrix& x_old) {
  if (x_new.rows() != x_old.rows() || x_new.cols() != x_old.cols())
    throw std::invalid_argument("relative_change: shape mismatch");
  const double denom = x_new.norm();
  if (!(denom > 0.0))
    throw std::domain_error("relative_change: zero denominator");
  return (x_new - x_old).norm() / denom;
}

namespace detail {

inline std::string iteration_tag(int outer, int inner) {
  return "(outer iteration " + std::to_string(outer) + ", inner step " +
         std::to_string(inner) + ")";
}

}  // namespace detail

/// Riemannian gradient descent on f(X) + (beta/2)||Y - X||^2 over St(n, p),
/// starting from x0 with fixed step eta. `outer` only labels diagnostics.
inline StiefelPoint rgd_inner(const SmoothProblem& problem,
                              const StiefelPoint& x0, const Matrix& y,
                              const SolverConfig& config, int outer = 0,
                              std::vector<double>* inner_trace = nullptr) {
  if (y.rows() != x0.n() || y.cols() != x0.p())
    throw std::invalid_argument("rgd_inner: Y shape differs from X");

  StiefelPoint x = x0;
  for (int j = 0; j < config.rgd_iters; ++j) {
    const Matrix g = problem.euclidean_gradient(x.value(), y, config.beta);
    if (!all_finite(g))
      throw NumericalError("rgd_inner: non-finite gradient " +
                           detail::iteration_tag(outer, j));
    const TangentVector rgrad = tangent_project(x, g);
    if (rgrad.direction().norm() < config.tol_grad) break;
    x = retract_polar(rgrad.scaled(-config.eta));
    if (config.check_feasibility && feasibility_gap(x.value()) > 1e-10)
      throw NumericalError("rgd_inner: feasibility drift " +
                           detail::iteration_tag(outer, j));
    if (inner_trace)
      inner_trace->push_back(problem.penalized_objective(x.value(), y, config.beta));
  }
  return x;
}

/// Starting Y for the alternation: the proximal step applied to X0, so the
/// first X-subproblem already sees the shrunken target.
inline Matrix initial_y(const StiefelPoint& x0, const SolverConfig& config,
                        const ProxOperator& prox = l1_prox()) {
  return prox(x0.value(), ProxParameter(1.0 / config.beta));
}

/// Alternating minimization: X <- RGD on the penalized subproblem,
/// Y <- prox_{g/beta}(X), until the relative change of X drops below tol_rel.
inline SolveResult solve(const SmoothProblem& problem, const Regularizer& reg,
                         const StiefelPoint& x0, const Matrix& y0,
                         const SolverConfig& config,
                         const OuterObserver& observer = {}) {
  config.validate();
  if (y0.rows() != x0.n() || y0.cols() != x0.p())
    throw std::invalid_argument("mqpam: Y0 shape differs from X0");
  if (!reg.prox) throw std::invalid_argument("mqpam: missing prox operator");

  const auto start = std::chrono::steady_clock::now();
  const ProxParameter step(1.0 / config.beta);
  auto full_objective = [&](const Matrix& x) {
    return problem.objective(x) + (reg.value ? reg.value(x) : 0.0);
  };

  SolveResult result(x0, y0);
  result.objective_trace.reserve(static_cast<std::size_t>(config.max_outer));
  std::vector<double>* inner = config.record_inner_trace ? &result.inner_trace : nullptr;

  StiefelPoint x = x0;
  Matrix y = y0;
  for (int k = 0; k < config.max_outer; ++k) {
    StiefelPoint x_next = rgd_inner(problem, x, y, config, k, inner);
    y = reg.prox(x_next.value(), step);
    if (!all_finite(y))
      throw NumericalError("mqpam: non-finite proximal output at outer iteration " +
                           std::to_string(k));
    const double rel = relative_change(x_next.value(), x.value());
    x = std::move(x_next);

    result.outer_iterations = k + 1;
    result.objective_trace.push_back(full_objective(x.value()));
    result.rel_change_final = rel;
    if (observer) observer(OuterIterate{k, x.value(), y, rel});
    if (rel <= config.tol_rel) {
      result.termination = Termination::kRelativeChange;
      break;
    }
  }

  result.x_final = std::move(x);
  result.y_final = std::move(y);
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

inline SolveResult solve(const SmoothProblem& problem, const ProxOperator& prox,
                         const StiefelPoint& x0, const Matrix& y0,
                         const SolverConfig& config,
                         const OuterObserver& observer = {}) {
  return solve(problem, Regularizer{prox, {}}, x0, y0, config, observer);
}

}  // namespace mqpam
