#include "tim/selfcheck.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "tim/admission.hpp"
#include "tim/objectives.hpp"
#include "tim/rng.hpp"
#include "tim/topology_io.hpp"
#include "tim/trust_region.hpp"

namespace tim {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

double fd_directional(const CostProblem& f, const FactoredPoint& x, const TangentVector& xi,
                      double t) {
  return (f.cost(retract(x, t * xi)) - f.cost(retract(x, -1.0 * t * xi))) / (2.0 * t);
}

// Least-squares slope of log(res) against log(t).
double loglog_slope(const std::vector<double>& ts, const std::vector<double>& res) {
  const int n = static_cast<int>(ts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(ts[i]);
    const double ly = std::log(std::max(res[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Random nonsingular r x r with moderate condition number.
Eigen::MatrixXd random_group_element(int r, std::mt19937_64& gen) {
  for (;;) {
    Eigen::MatrixXd m = randn_matrix(r, r, gen);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin > 1e-3 && smax / smin < 50.0) return m;
  }
}

struct Suite {
  std::vector<CheckResult> results;
  void record(const std::string& name, bool pass, const std::string& detail) {
    results.push_back(CheckResult{name, pass, detail});
  }
};

void check_geometry(Suite& suite, std::uint64_t seed) {
  const std::vector<ManifoldShape> shapes = {{4, 2}, {8, 3}, {16, 5}, {32, 6}};
  double worst_invariance = 0.0, worst_membership = 0.0, worst_idem = 0.0, worst_ortho = 0.0;
  std::mt19937_64 gen(mix_seed(seed, 0xe0));
  for (std::size_t c = 0; c < shapes.size(); ++c) {
    const auto s = shapes[c];
    const FactoredPoint x = random_point(s, mix_seed(seed, c));
    const TangentVector xi = random_tangent(x, mix_seed(seed, 10 + c));
    const TangentVector eta = random_tangent(x, mix_seed(seed, 20 + c));

    const Eigen::MatrixXd m = random_group_element(s.r, gen);
    const Eigen::MatrixXd minv = m.inverse();
    const FactoredPoint y(x.U * minv, x.V * m.transpose());
    const TangentVector xi_y{xi.U * minv, xi.V * m.transpose()};
    const TangentVector eta_y{eta.U * minv, eta.V * m.transpose()};
    const double g1 = inner(x, xi, eta);
    const double g2 = inner(y, xi_y, eta_y);
    worst_invariance = std::max(worst_invariance, std::abs(g1 - g2) / std::max(1.0, std::abs(g1)));

    TangentVector amb{randn_matrix(s.K, s.r, gen), randn_matrix(s.K, s.r, gen)};
    const TangentVector h = project_horizontal(x, amb);
    worst_membership = std::max(worst_membership, horizontal_residual(x, h));
    const TangentVector hh = project_horizontal(x, h);
    worst_idem = std::max(worst_idem, norm(x, hh - h) / std::max(1.0, norm(x, h)));

    const Eigen::MatrixXd lam = randn_matrix(s.r, s.r, gen);
    const TangentVector vert{-x.U * lam, x.V * lam.transpose()};
    worst_ortho =
        std::max(worst_ortho, std::abs(inner(x, h, vert)) /
                                  std::max(1.0, norm(x, h) * norm(x, vert)));
  }
  suite.record("metric_gl_invariance", worst_invariance <= 1e-10,
               fmt("max rel err %.2e", worst_invariance));
  suite.record("horizontal_membership", worst_membership <= 1e-8,
               fmt("max residual %.2e", worst_membership));
  suite.record("projection_idempotent", worst_idem <= 1e-12, fmt("max rel err %.2e", worst_idem));
  suite.record("horizontal_vertical_orthogonal", worst_ortho <= 1e-10,
               fmt("max rel err %.2e", worst_ortho));
}

void check_derivatives(Suite& suite, std::uint64_t seed) {
  const ManifoldShape s{8, 3};
  const NetworkTopology topo = gen_topology(s.K, 20, mix_seed(seed, 0xd0));
  const SparsityProblem sparsity(topo, s.r, SmoothedL1Params{});
  ObservationMask mask = feasibility_mask(topo, {1, 2, 3, 4, 5, 6, 7, 8});
  const CompletionProblem completion(mask, s.r);

  double worst_fd = 0.0, worst_sym = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const FactoredPoint x = random_point(s, mix_seed(seed, 30 + trial));
    const TangentVector xi = random_tangent(x, mix_seed(seed, 40 + trial));
    const TangentVector eta = random_tangent(x, mix_seed(seed, 50 + trial));
    for (const CostProblem* f : {static_cast<const CostProblem*>(&sparsity),
                                 static_cast<const CostProblem*>(&completion)}) {
      const TangentVector grad = riemannian_gradient(x, f->euclidean_gradient(x));
      const double analytic = inner(x, grad, xi);
      const double numeric = fd_directional(*f, x, xi, 1e-6);
      worst_fd = std::max(worst_fd,
                          std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic)));

      auto hess = [&](const TangentVector& v) {
        return riemannian_hessian(x, f->euclidean_gradient(x), f->euclidean_hessian_vec(x, v), v);
      };
      const TangentVector hxi = hess(project_horizontal(x, xi));
      const TangentVector heta = hess(project_horizontal(x, eta));
      const double a = inner(x, hxi, eta);
      const double b = inner(x, xi, heta);
      worst_sym = std::max(worst_sym, std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}));
    }
  }
  suite.record("gradient_finite_difference", worst_fd <= 1e-5, fmt("max rel err %.2e", worst_fd));
  suite.record("hessian_self_adjoint", worst_sym <= 1e-8, fmt("max rel err %.2e", worst_sym));

  // Taylor decay at a critical point: fully observed completion whose target
  // is the evaluation point itself.
  double worst_slope = 4.0;
  for (int trial = 0; trial < 3; ++trial) {
    const FactoredPoint x = random_point(s, mix_seed(seed, 60 + trial));
    const CompletionProblem exact(ObservationMask::full(s.K), s.r, assemble_matrix(x));
    const TangentVector xi =
        project_horizontal(x, random_tangent(x, mix_seed(seed, 70 + trial)));
    const TangentVector hxi =
        riemannian_hessian(x, exact.euclidean_gradient(x), exact.euclidean_hessian_vec(x, xi), xi);
    const double quad = 0.5 * inner(x, hxi, xi);
    const double f0 = exact.cost(x);
    std::vector<double> ts, res;
    for (double t = 1e-2; t >= 0.9e-4; t *= 0.7) {
      ts.push_back(t);
      res.push_back(std::abs(exact.cost(retract(x, t * xi)) - f0 - t * t * quad));
    }
    worst_slope = std::min(worst_slope, loglog_slope(ts, res));
  }
  suite.record("hessian_taylor_decay", worst_slope >= 2.9, fmt("min slope %.3f", worst_slope));
}

void check_objectives(Suite& suite, std::uint64_t seed) {
  const int K = 8, r = 3;
  const NetworkTopology topo = gen_topology(K, 24, mix_seed(seed, 0xc0));
  const SmoothedL1Params p{};
  const FactoredPoint x = random_point({K, r}, mix_seed(seed, 80));

  // Dense double-loop reference for the sparsity objective.
  const Eigen::MatrixXd X = assemble_matrix(x);
  double ref = 0.0;
  for (int i = 1; i <= K; ++i)
    for (int j = 1; j <= K; ++j)
      if (i != j && topo.has_link(i, j)) ref += 0.5 * X(i - 1, j - 1) * X(i - 1, j - 1);
  for (int i = 0; i < K; ++i)
    ref += p.rho * (p.lambda * X(i, i) * X(i, i) -
                    std::sqrt(X(i, i) * X(i, i) + p.epsilon * p.epsilon));
  const double got = sparsity_cost(x, topo, p);
  suite.record("sparsity_value_oracle", std::abs(got - ref) <= 1e-12 * std::max(1.0, std::abs(ref)),
               fmt("abs err %.2e", std::abs(got - ref)));

  // Boundedness of the smoothed objective.
  bool bounded = true;
  const double bound = -p.rho * K * (1.0 / (4.0 * p.lambda) + p.epsilon);
  for (int t = 0; t < 500; ++t) {
    const FactoredPoint y = random_point({K, r}, mix_seed(seed, 1000 + t));
    if (sparsity_cost(y, topo, p) < bound - 1e-12) {
      bounded = false;
      break;
    }
  }
  suite.record("sparsity_lower_bound", bounded, fmt("bound %.6f", bound));

  // Scalar stationary magnitude via ternary search on the diagonal term.
  auto phi = [&](double t) {
    return p.lambda * t * t - std::sqrt(t * t + p.epsilon * p.epsilon);
  };
  double lo = 0.0, hi = 2.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (phi(m1) < phi(m2))
      hi = m2;
    else
      lo = m1;
  }
  const double tstar = 0.5 * (lo + hi);
  suite.record("diag_minimizer_magnitude", tstar >= 0.99 && tstar <= 1.0,
               fmt("t* = %.6f", tstar));
}

void check_solver(Suite& suite, std::uint64_t seed) {
  const ManifoldShape s{12, 3};
  const FactoredPoint target = random_point(s, mix_seed(seed, 90));
  const CompletionProblem problem(ObservationMask::full(s.K), s.r, assemble_matrix(target));
  const FactoredPoint x0 = random_point(s, mix_seed(seed, 91));
  const SolveReport rep = minimize(problem, x0, TrustRegionConfig{});
  suite.record("solver_exact_completion", rep.converged && rep.final_cost <= 1e-12,
               fmt("final cost %.2e", rep.final_cost));

  const FactoredPoint x = random_point({6, 2}, mix_seed(seed, 92));
  const TangentVector grad = random_tangent(x, mix_seed(seed, 93));
  const auto identity_op = [](const TangentVector& v) { return v; };
  const SubproblemResult sub = solve_subproblem(x, grad, identity_op, 100.0, TrustRegionConfig{});
  const double err = norm(x, sub.step + grad);
  suite.record("tcg_newton_step", err <= 1e-10, fmt("|step + grad| = %.2e", err));
}

void check_admission(Suite& suite, std::uint64_t seed) {
  const NetworkTopology topo = gen_topology(6, 18, mix_seed(seed, 0xa0));
  AdmissionConfig cfg;
  cfg.rank = 3;
  cfg.seed = mix_seed(seed, 0xa1);
  const AdmissionResult result = run_pipeline(topo, cfg);
  const OracleResult oracle = exhaustive_oracle(topo, cfg);
  const int lower = orthogonal_baseline(topo.K, cfg.rank);
  const bool sandwich = lower <= result.n_admitted && result.n_admitted <= oracle.n_max;
  suite.record("pipeline_oracle_sandwich", sandwich,
               "baseline " + std::to_string(lower) + " <= pipeline " +
                   std::to_string(result.n_admitted) + " <= oracle " +
                   std::to_string(oracle.n_max));

  AdmissionConfig fresh = cfg;
  fresh.seed = mix_seed(cfg.seed, 0xfe);
  fresh.restarts = 8;
  const FeasibilityResult verify = feasibility_check(topo, result.admitted, fresh);
  suite.record("admitted_set_reverifies", verify.feasible,
               fmt("fresh-seed residual %.2e", verify.residual));
}

}  // namespace

std::vector<CheckResult> run_selfcheck(std::uint64_t seed) {
  Suite suite;
  check_geometry(suite, seed);
  check_derivatives(suite, seed);
  check_objectives(suite, seed);
  check_solver(suite, seed);
  check_admission(suite, seed);
  return suite.results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace tim
