#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "tim/manifold.hpp"
#include "tim/objectives.hpp"
#include "tim/trust_region.hpp"

using namespace tim;

namespace {

// Quadratic with deliberately wrong gradient sign: every proposed step is an
// ascent step, so the solver must reject forever and collapse the radius.
class LyingProblem : public CostProblem {
 public:
  explicit LyingProblem(ManifoldShape s) : shape_(s) {}
  ManifoldShape shape() const override { return shape_; }
  double cost(const FactoredPoint& x) const override {
    return 0.5 * (x.U.squaredNorm() + x.V.squaredNorm());
  }
  TangentVector euclidean_gradient(const FactoredPoint& x) const override {
    return TangentVector{-x.U, -x.V};
  }
  TangentVector euclidean_hessian_vec(const FactoredPoint&,
                                      const TangentVector& xi) const override {
    return TangentVector{-xi.U, -xi.V};
  }

 private:
  ManifoldShape shape_;
};

// Finite at the start point, NaN everywhere else.
class PoisonedProblem : public CostProblem {
 public:
  PoisonedProblem(ManifoldShape s, FactoredPoint x0) : shape_(s), x0_(std::move(x0)) {}
  ManifoldShape shape() const override { return shape_; }
  double cost(const FactoredPoint& x) const override {
    if ((x.U - x0_.U).norm() == 0.0 && (x.V - x0_.V).norm() == 0.0)
      return 0.5 * (x.U.squaredNorm() + x.V.squaredNorm());
    return std::numeric_limits<double>::quiet_NaN();
  }
  TangentVector euclidean_gradient(const FactoredPoint& x) const override {
    return TangentVector{x.U, x.V};
  }
  TangentVector euclidean_hessian_vec(const FactoredPoint&,
                                      const TangentVector& xi) const override {
    return xi;
  }

 private:
  ManifoldShape shape_;
  FactoredPoint x0_;
};

}  // namespace

TEST_CASE("solve_subproblem: zero gradient gives zero step") {
  const FactoredPoint x = random_point({5, 2}, 1);
  const auto identity_op = [](const TangentVector& v) { return v; };
  const SubproblemResult sub =
      solve_subproblem(x, TangentVector::zero(x.shape()), identity_op, 1.0, TrustRegionConfig{});
  CHECK(norm(x, sub.step) == 0.0);
  CHECK(sub.predicted_decrease == 0.0);
  CHECK_FALSE(sub.boundary_hit);
}

TEST_CASE("solve_subproblem: identity Hessian recovers the Newton step") {
  const FactoredPoint x = random_point({6, 2}, 2);
  const TangentVector grad = 3.0 * random_tangent(x, 3);
  const auto identity_op = [](const TangentVector& v) { return v; };
  const SubproblemResult sub = solve_subproblem(x, grad, identity_op, 1e6, TrustRegionConfig{});
  CHECK(norm(x, sub.step + grad) <= 1e-10 * norm(x, grad));
  const double gn2 = inner(x, grad, grad);
  CHECK(sub.predicted_decrease == doctest::Approx(0.5 * gn2).epsilon(1e-10));
  CHECK_FALSE(sub.boundary_hit);
}

TEST_CASE("solve_subproblem: small radius hits the boundary and beats the Cauchy point") {
  const FactoredPoint x = random_point({6, 3}, 4);
  const TangentVector grad = random_tangent(x, 5);

  // Seeded SPD operator on the horizontal space.
  std::vector<TangentVector> dirs;
  for (std::uint64_t k = 0; k < 3; ++k) dirs.push_back(random_tangent(x, 10 + k));
  const auto spd_op = [&](const TangentVector& v) {
    TangentVector out = 2.0 * v;
    for (std::size_t k = 0; k < dirs.size(); ++k)
      out += (1.5 + double(k)) * inner(x, dirs[k], v) * dirs[k];
    return out;
  };

  const double delta = 0.05;
  const SubproblemResult sub = solve_subproblem(x, grad, spd_op, delta, TrustRegionConfig{});
  CHECK(sub.boundary_hit);
  CHECK(norm(x, sub.step) == doctest::Approx(delta).epsilon(1e-10));
  CHECK(inner(x, sub.step, sub.step) <= delta * delta + 1e-12);

  const auto model = [&](const TangentVector& s) {
    return inner(x, grad, s) + 0.5 * inner(x, s, spd_op(s));
  };
  // Explicit Cauchy point: minimize along -grad within the radius.
  const double gn = norm(x, grad);
  const double ghg = inner(x, grad, spd_op(grad));
  const double tau = std::min(gn * gn / ghg, delta / gn);
  const TangentVector cauchy = -tau * grad;
  CHECK(model(sub.step) <= model(cauchy) + 1e-12);
  CHECK(sub.predicted_decrease >= -model(cauchy) - 1e-12);
}

TEST_CASE("minimize: exact fully-observed completion reaches machine-level cost") {
  const ManifoldShape s{10, 3};
  const FactoredPoint target = random_point(s, 21);
  const CompletionProblem problem(ObservationMask::full(s.K), s.r, assemble_matrix(target));
  const FactoredPoint x0 = random_point(s, 22);

  const SolveReport rep = minimize(problem, x0, TrustRegionConfig{});
  CHECK(rep.converged);
  CHECK(rep.termination_reason == Termination::grad_tol);
  CHECK(rep.final_cost <= 1e-12);
  CHECK(rep.final_grad_norm <= 1e-6);
  CHECK(rep.outer_iters <= 500);
}

TEST_CASE("minimize: stationary start returns immediately") {
  const ManifoldShape s{6, 2};
  const FactoredPoint x = random_point(s, 31);
  const CompletionProblem problem(ObservationMask::full(s.K), s.r, assemble_matrix(x));
  const SolveReport rep = minimize(problem, x, TrustRegionConfig{});
  CHECK(rep.converged);
  CHECK(rep.outer_iters <= 1);
  CHECK(rep.final_grad_norm <= 1e-6);
}

TEST_CASE("minimize: rank-1 completion of the all-ones 4x4 matrix") {
  // 8 observed entries covering every row and column.
  const std::vector<std::pair<int, int>> cells = {{0, 0}, {1, 1}, {2, 2}, {3, 3},
                                                  {0, 1}, {1, 2}, {2, 3}, {3, 0}};
  const ObservationMask mask(4, cells);
  const CompletionProblem problem(mask, 1, Eigen::MatrixXd::Ones(4, 4));
  const SolveReport rep = minimize(problem, random_point({4, 1}, 41), TrustRegionConfig{});
  CHECK(rep.final_cost <= 1e-12);
  CHECK(rep.converged);
}

TEST_CASE("minimize: accepted costs decrease monotonically") {
  // The solver is deterministic, so capped reruns expose the accepted-iterate
  // cost sequence.
  const ManifoldShape s{6, 2};
  const FactoredPoint target = random_point(s, 51);
  const CompletionProblem problem(ObservationMask::full(s.K), s.r, assemble_matrix(target));
  const FactoredPoint x0 = random_point(s, 52);

  double prev = problem.cost(x0);
  for (int cap = 1; cap <= 20; ++cap) {
    TrustRegionConfig cfg;
    cfg.max_outer_iters = cap;
    cfg.grad_tol = 1e-300;  // never stop on the gradient inside this window
    const SolveReport rep = minimize(problem, x0, cfg);
    CHECK(rep.final_cost <= prev + 1e-15);
    prev = rep.final_cost;
  }
}

TEST_CASE("minimize: deterministic iterate sequence") {
  const ManifoldShape s{8, 2};
  const FactoredPoint target = random_point(s, 61);
  const CompletionProblem problem(ObservationMask::full(s.K), s.r, assemble_matrix(target));
  const FactoredPoint x0 = random_point(s, 62);

  const SolveReport a = minimize(problem, x0, TrustRegionConfig{});
  const SolveReport b = minimize(problem, x0, TrustRegionConfig{});
  CHECK((a.final_point.U - b.final_point.U).norm() == 0.0);
  CHECK((a.final_point.V - b.final_point.V).norm() == 0.0);
  CHECK(a.final_cost == b.final_cost);
  CHECK(a.outer_iters == b.outer_iters);
  CHECK(a.final_grad_norm == b.final_grad_norm);
}

TEST_CASE("minimize: radius collapse on a model that never agrees") {
  const ManifoldShape s{4, 2};
  const LyingProblem problem(s);
  const SolveReport rep = minimize(problem, random_point(s, 71), TrustRegionConfig{});
  CHECK_FALSE(rep.converged);
  CHECK(rep.termination_reason == Termination::radius_collapse);
}

TEST_CASE("minimize: NaN cost raises NumericalError carrying the last good iterate") {
  const ManifoldShape s{4, 2};
  const FactoredPoint x0 = random_point(s, 81);
  const PoisonedProblem problem(s, x0);
  try {
    minimize(problem, x0, TrustRegionConfig{});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK((e.last_good.U - x0.U).norm() == 0.0);
    CHECK((e.last_good.V - x0.V).norm() == 0.0);
  }
}

TEST_CASE("minimize: config validation") {
  const ManifoldShape s{4, 2};
  const FactoredPoint x = random_point(s, 91);
  const CompletionProblem problem(ObservationMask::full(s.K), s.r, assemble_matrix(x));

  TrustRegionConfig bad;
  bad.accept_threshold = 0.5;
  CHECK_THROWS_AS(minimize(problem, x, bad), ArgumentError);

  bad = TrustRegionConfig{};
  bad.grad_tol = 0.0;
  CHECK_THROWS_AS(minimize(problem, x, bad), ArgumentError);

  bad = TrustRegionConfig{};
  bad.delta0 = 10.0;
  bad.delta_max = 1.0;
  CHECK_THROWS_AS(minimize(problem, x, bad), ArgumentError);
}
