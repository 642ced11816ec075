#pragma once

#include <functional>
#include <string>

#include "tim/manifold.hpp"

namespace tim {

/// A smooth cost on the total space, with Euclidean derivatives in factored
/// form. The solver converts them to their Riemannian counterparts.
class CostProblem {
 public:
  virtual ~CostProblem() = default;
  virtual ManifoldShape shape() const = 0;
  virtual double cost(const FactoredPoint& x) const = 0;
  /// Euclidean partials (df/dU, df/dV).
  virtual TangentVector euclidean_gradient(const FactoredPoint& x) const = 0;
  /// Directional derivative of the Euclidean partials along xi.
  virtual TangentVector euclidean_hessian_vec(const FactoredPoint& x,
                                              const TangentVector& xi) const = 0;
};

/// Trust-region controls. Zero-valued delta0 / delta_max / max_inner_iters
/// select shape-dependent defaults: delta0 = sqrt(K r), delta_max = 16 delta0,
/// max_inner_iters = quotient dimension.
struct TrustRegionConfig {
  double delta0 = 0.0;
  double delta_max = 0.0;
  double accept_threshold = 0.1;  ///< in (0, 0.25]
  double grad_tol = 1e-6;
  int max_outer_iters = 500;
  int max_inner_iters = 0;
  double inner_kappa = 0.1;
  double inner_theta = 1.0;
};

enum class Termination { grad_tol, max_iters, radius_collapse };

const char* to_string(Termination t);

struct SolveReport {
  FactoredPoint final_point;
  double final_cost = 0.0;
  double final_grad_norm = 0.0;
  int outer_iters = 0;
  bool converged = false;
  Termination termination_reason = Termination::max_iters;
};

/// Cost or gradient evaluated to NaN/Inf; carries the last accepted iterate.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, FactoredPoint last_good_in)
      : std::runtime_error(what), last_good(std::move(last_good_in)) {}
  FactoredPoint last_good;
};

struct SubproblemResult {
  TangentVector step;
  double predicted_decrease = 0.0;
  bool boundary_hit = false;
  int inner_iters = 0;
};

using HessOperator = std::function<TangentVector(const TangentVector&)>;

/// Truncated conjugate gradient on the horizontal space for the subproblem
///   minimize  g(grad, s) + 0.5 g(s, H[s])   s.t.  g(s, s) <= delta^2.
/// Starts from zero, stops on negative curvature, the boundary, the
/// kappa/theta residual rule, or the iteration cap.
SubproblemResult solve_subproblem(const FactoredPoint& x, const TangentVector& grad,
                                  const HessOperator& hess_op, double delta,
                                  const TrustRegionConfig& cfg);

/// Riemannian trust-region outer loop. Deterministic given its arguments;
/// accepted iterates have strictly decreasing cost.
SolveReport minimize(const CostProblem& problem, const FactoredPoint& x0,
                     const TrustRegionConfig& cfg);

}  // namespace tim
