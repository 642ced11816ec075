#include "tim/trust_region.hpp"

#include <algorithm>
#include <cmath>

namespace tim {

namespace {

constexpr double kRadiusFloor = 1e-14;
constexpr double kShrinkRatio = 0.1;
constexpr double kGrowRatio = 0.75;
constexpr double kShrinkFactor = 0.25;
constexpr double kGrowFactor = 2.0;

bool finite(double v) { return std::isfinite(v); }

bool finite(const TangentVector& t) { return t.U.allFinite() && t.V.allFinite(); }

// Positive root of |s + tau d|^2 = delta^2 in the metric at x.
double boundary_tau(double ss, double sd, double dd, double delta) {
  const double disc = std::max(0.0, sd * sd + dd * (delta * delta - ss));
  return (-sd + std::sqrt(disc)) / dd;
}

struct ResolvedConfig {
  double delta0;
  double delta_max;
  int max_inner;
};

ResolvedConfig resolve(const TrustRegionConfig& cfg, const ManifoldShape& shape) {
  ResolvedConfig r;
  r.delta0 = cfg.delta0 > 0.0 ? cfg.delta0 : std::sqrt(double(shape.K) * shape.r);
  r.delta_max = cfg.delta_max > 0.0 ? cfg.delta_max : 16.0 * r.delta0;
  r.max_inner = cfg.max_inner_iters > 0 ? cfg.max_inner_iters : shape.quotient_dim();
  if (r.delta0 > r.delta_max)
    throw ArgumentError("TrustRegionConfig: delta0 must not exceed delta_max");
  if (!(cfg.grad_tol > 0.0)) throw ArgumentError("TrustRegionConfig: grad_tol must be positive");
  if (!(cfg.accept_threshold > 0.0 && cfg.accept_threshold <= 0.25))
    throw ArgumentError("TrustRegionConfig: accept_threshold must lie in (0, 0.25]");
  return r;
}

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::grad_tol: return "grad_tol";
    case Termination::max_iters: return "max_iters";
    case Termination::radius_collapse: return "radius_collapse";
  }
  return "unknown";
}

SubproblemResult solve_subproblem(const FactoredPoint& x, const TangentVector& grad,
                                  const HessOperator& hess_op, double delta,
                                  const TrustRegionConfig& cfg) {
  SubproblemResult out;
  out.step = TangentVector::zero(x.shape());
  if (!(delta > 0.0)) return out;

  const int max_inner =
      cfg.max_inner_iters > 0 ? cfg.max_inner_iters : x.shape().quotient_dim();

  TangentVector s = TangentVector::zero(x.shape());
  TangentVector r = grad;
  double rr = inner(x, r, r);
  const double grad_norm = std::sqrt(std::max(0.0, rr));
  if (grad_norm == 0.0) return out;
  const double stop_resid =
      grad_norm * std::min(cfg.inner_kappa, std::pow(grad_norm, cfg.inner_theta));

  TangentVector d = -r;
  double ss = 0.0;  // |s|^2, maintained incrementally

  for (int j = 0; j < max_inner; ++j) {
    const TangentVector hd = hess_op(d);
    const double dhd = inner(x, d, hd);
    const double sd = inner(x, s, d);
    const double dd = inner(x, d, d);
    if (dhd <= 0.0) {
      s += boundary_tau(ss, sd, dd, delta) * d;
      out.boundary_hit = true;
      out.inner_iters = j + 1;
      break;
    }
    const double alpha = rr / dhd;
    const double ss_new = ss + 2.0 * alpha * sd + alpha * alpha * dd;
    if (ss_new >= delta * delta) {
      s += boundary_tau(ss, sd, dd, delta) * d;
      out.boundary_hit = true;
      out.inner_iters = j + 1;
      break;
    }
    s += alpha * d;
    ss = ss_new;
    r += alpha * hd;
    const double rr_new = inner(x, r, r);
    out.inner_iters = j + 1;
    if (std::sqrt(std::max(0.0, rr_new)) <= stop_resid) break;
    const double beta = rr_new / rr;
    rr = rr_new;
    d = -r + beta * d;
  }

  out.step = s;
  const double model = inner(x, grad, s) + 0.5 * inner(x, s, hess_op(s));
  out.predicted_decrease = std::max(0.0, -model);
  return out;
}

SolveReport minimize(const CostProblem& problem, const FactoredPoint& x0,
                     const TrustRegionConfig& cfg) {
  const ManifoldShape shape = problem.shape();
  detail::require_same_shape(shape, x0.shape(), "minimize");
  const ResolvedConfig rc = resolve(cfg, shape);

  FactoredPoint x = x0;
  double f = problem.cost(x);
  if (!finite(f)) throw NumericalError("minimize: cost not finite at start", x0);

  TangentVector egrad = problem.euclidean_gradient(x);
  if (!finite(egrad)) throw NumericalError("minimize: gradient not finite at start", x0);
  TangentVector grad = project_horizontal(x, riemannian_gradient(x, egrad));
  double grad_norm = norm(x, grad);

  SolveReport report;
  report.final_point = x;
  report.final_cost = f;
  report.final_grad_norm = grad_norm;
  if (grad_norm <= cfg.grad_tol) {
    report.converged = true;
    report.termination_reason = Termination::grad_tol;
    return report;
  }

  double delta = rc.delta0;
  for (int it = 1; it <= cfg.max_outer_iters; ++it) {
    report.outer_iters = it;

    const HessOperator hess_op = [&](const TangentVector& xi) {
      return riemannian_hessian(x, egrad, problem.euclidean_hessian_vec(x, xi), xi);
    };
    const SubproblemResult sub = solve_subproblem(x, grad, hess_op, delta, cfg);

    bool accepted = false;
    if (sub.predicted_decrease > 0.0) {
      const FactoredPoint trial = retract(x, sub.step);
      const double f_trial = problem.cost(trial);
      if (!finite(f_trial)) throw NumericalError("minimize: cost not finite at trial point", x);
      const double actual = f - f_trial;
      const double ratio = actual / sub.predicted_decrease;
      accepted = ratio > cfg.accept_threshold && actual > 0.0;
      if (accepted) {
        const FactoredPoint last_good = x;
        const double f_good = f;
        x = trial;
        f = f_trial;
        try {
          egrad = problem.euclidean_gradient(x);
          if (!finite(egrad))
            throw NumericalError("minimize: gradient not finite at accepted point", last_good);
          grad = project_horizontal(x, riemannian_gradient(x, egrad));
          grad_norm = norm(x, grad);
          if (!finite(grad_norm))
            throw NumericalError("minimize: gradient norm not finite", last_good);
        } catch (const RankDeficiencyError&) {
          // The step left the full-rank stratum. Roll back and shrink: the
          // radius control either recovers or collapses at the last good
          // iterate.
          x = last_good;
          f = f_good;
          accepted = false;
        }
      }
      if (!accepted || ratio < kShrinkRatio) {
        delta *= kShrinkFactor;
      } else if (ratio > kGrowRatio && sub.boundary_hit) {
        delta = std::min(kGrowFactor * delta, rc.delta_max);
      }
    } else {
      // Degenerate model (zero step or non-positive predicted decrease).
      delta *= kShrinkFactor;
    }

    report.final_point = x;
    report.final_cost = f;
    report.final_grad_norm = grad_norm;

    if (grad_norm <= cfg.grad_tol) {
      report.converged = true;
      report.termination_reason = Termination::grad_tol;
      return report;
    }
    if (delta < kRadiusFloor) {
      report.converged = false;
      report.termination_reason = Termination::radius_collapse;
      return report;
    }
  }

  report.converged = false;
  report.termination_reason = Termination::max_iters;
  return report;
}

}  // namespace tim
