#include "tim/manifold.hpp"

#include <cmath>
#include <random>
#include <string>

#include "tim/rng.hpp"

namespace tim {

namespace {

constexpr double kRankPivotTol = 1e-12;  // smallest/largest Gram pivot ratio
constexpr double kCondWarn = 1e10;       // Gram condition estimate that raises the flag

// Pivot extremes of the LDLT of a symmetric PSD matrix. A non-positive pivot
// counts as zero.
void pivot_range(const Eigen::LDLT<Eigen::MatrixXd>& ldlt, double& dmin, double& dmax) {
  Eigen::VectorXd d = ldlt.vectorD();
  dmin = d.minCoeff();
  dmax = d.maxCoeff();
  if (dmin < 0.0) dmin = 0.0;
}

bool gram_status(const Eigen::MatrixXd& factor, bool& warn) {
  Eigen::MatrixXd gram = factor.transpose() * factor;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  double dmin = 0.0, dmax = 0.0;
  pivot_range(ldlt, dmin, dmax);
  if (ldlt.info() != Eigen::Success || dmax <= 0.0 || dmin < kRankPivotTol * dmax)
    return false;
  if (dmin * kCondWarn < dmax) warn = true;
  return true;
}

Eigen::MatrixXd sym(const Eigen::MatrixXd& z) { return 0.5 * (z + z.transpose()); }

}  // namespace

FactoredPoint::FactoredPoint(Eigen::MatrixXd U_in, Eigen::MatrixXd V_in)
    : U(std::move(U_in)), V(std::move(V_in)) {
  if (U.rows() != V.rows() || U.cols() != V.cols())
    throw DimensionError("FactoredPoint: U and V must have identical shapes");
  if (!shape().valid())
    throw DimensionError("FactoredPoint: need 1 <= r <= K, got K=" + std::to_string(shape().K) +
                         " r=" + std::to_string(shape().r));
  bool warn = false;
  if (!gram_status(U, warn) || !gram_status(V, warn))
    throw RankDeficiencyError("FactoredPoint: factor is not full column rank");
  cond_warning = warn;
}

FactoredPoint FactoredPoint::unchecked(Eigen::MatrixXd U_in, Eigen::MatrixXd V_in) {
  FactoredPoint x;
  x.U = std::move(U_in);
  x.V = std::move(V_in);
  bool warn = false;
  bool ok = gram_status(x.U, warn) && gram_status(x.V, warn);
  x.cond_warning = warn || !ok;
  return x;
}

namespace detail {

GramFactors factor_grams(const FactoredPoint& x) {
  GramFactors g;
  g.gu = x.U.transpose() * x.U;
  g.gv = x.V.transpose() * x.V;
  g.gu_ldlt.compute(g.gu);
  g.gv_ldlt.compute(g.gv);
  for (const auto* ldlt : {&g.gu_ldlt, &g.gv_ldlt}) {
    double dmin = 0.0, dmax = 0.0;
    pivot_range(*ldlt, dmin, dmax);
    if (ldlt->info() != Eigen::Success || dmax <= 0.0 || dmin < kRankPivotTol * dmax)
      throw RankDeficiencyError("Gram matrix is numerically singular");
  }
  return g;
}

Eigen::MatrixXd rsolve(const Eigen::LDLT<Eigen::MatrixXd>& A, const Eigen::MatrixXd& M) {
  return A.solve(M.transpose()).transpose();
}

void require_same_shape(const ManifoldShape& a, const ManifoldShape& b, const char* where) {
  if (a != b)
    throw DimensionError(std::string(where) + ": shape mismatch (" + std::to_string(a.K) + "x" +
                         std::to_string(a.r) + " vs " + std::to_string(b.K) + "x" +
                         std::to_string(b.r) + ")");
}

}  // namespace detail

double inner(const FactoredPoint& x, const TangentVector& xi, const TangentVector& eta) {
  detail::require_same_shape(x.shape(), xi.shape(), "inner");
  detail::require_same_shape(x.shape(), eta.shape(), "inner");
  const Eigen::MatrixXd gu = x.U.transpose() * x.U;
  const Eigen::MatrixXd gv = x.V.transpose() * x.V;
  return (gv * (xi.U.transpose() * eta.U)).trace() + (gu * (xi.V.transpose() * eta.V)).trace();
}

double norm(const FactoredPoint& x, const TangentVector& xi) {
  return std::sqrt(std::max(0.0, inner(x, xi, xi)));
}

TangentVector project_horizontal(const FactoredPoint& x, const TangentVector& eta) {
  detail::require_same_shape(x.shape(), eta.shape(), "project_horizontal");
  auto g = detail::factor_grams(x);
  // L = 0.5 (eta_V^T V (V^T V)^{-1} - (U^T U)^{-1} U^T eta_U)
  const Eigen::MatrixXd lam =
      0.5 * (detail::rsolve(g.gv_ldlt, eta.V.transpose() * x.V) -
             g.gu_ldlt.solve(x.U.transpose() * eta.U));
  return TangentVector{eta.U + x.U * lam, eta.V - x.V * lam.transpose()};
}

double horizontal_residual(const FactoredPoint& x, const TangentVector& xi) {
  const Eigen::MatrixXd lhs = x.U.transpose() * xi.U * (x.V.transpose() * x.V);
  const Eigen::MatrixXd rhs = (x.U.transpose() * x.U) * xi.V.transpose() * x.V;
  return (lhs - rhs).norm();
}

TangentVector riemannian_gradient(const FactoredPoint& x, const TangentVector& egrad) {
  detail::require_same_shape(x.shape(), egrad.shape(), "riemannian_gradient");
  auto g = detail::factor_grams(x);
  return TangentVector{detail::rsolve(g.gv_ldlt, egrad.U), detail::rsolve(g.gu_ldlt, egrad.V)};
}

TangentVector riemannian_hessian(const FactoredPoint& x, const TangentVector& egrad,
                                 const TangentVector& ehess, const TangentVector& xi) {
  detail::require_same_shape(x.shape(), egrad.shape(), "riemannian_hessian");
  detail::require_same_shape(x.shape(), ehess.shape(), "riemannian_hessian");
  detail::require_same_shape(x.shape(), xi.shape(), "riemannian_hessian");
  auto g = detail::factor_grams(x);

  const TangentVector rg{detail::rsolve(g.gv_ldlt, egrad.U), detail::rsolve(g.gu_ldlt, egrad.V)};

  const Eigen::MatrixXd sym_xiV_V = sym(xi.V.transpose() * x.V);
  const Eigen::MatrixXd sym_xiU_U = sym(xi.U.transpose() * x.U);

  // Directional derivative of the gradient field, product rule through the
  // Gram inverses with D(A^{-1})[B] = -A^{-1} B A^{-1}.
  const TangentVector dgrad{detail::rsolve(g.gv_ldlt, ehess.U - 2.0 * rg.U * sym_xiV_V),
                            detail::rsolve(g.gu_ldlt, ehess.V - 2.0 * rg.V * sym_xiU_U)};

  // Connection correction for the non-constant metric, evaluated on
  // (xi, rgrad).
  const Eigen::MatrixXd sym_rgV_V = sym(rg.V.transpose() * x.V);
  const Eigen::MatrixXd sym_rgU_U = sym(rg.U.transpose() * x.U);
  const Eigen::MatrixXd sym_rgV_xiV = sym(rg.V.transpose() * xi.V);
  const Eigen::MatrixXd sym_rgU_xiU = sym(rg.U.transpose() * xi.U);
  const TangentVector corr{
      detail::rsolve(g.gv_ldlt, rg.U * sym_xiV_V + xi.U * sym_rgV_V - x.U * sym_rgV_xiV),
      detail::rsolve(g.gu_ldlt, rg.V * sym_xiU_U + xi.V * sym_rgU_U - x.V * sym_rgU_xiU)};

  return project_horizontal(x, dgrad + corr);
}

FactoredPoint retract(const FactoredPoint& x, const TangentVector& xi) {
  detail::require_same_shape(x.shape(), xi.shape(), "retract");
  return FactoredPoint::unchecked(x.U + xi.U, x.V + xi.V);
}

FactoredPoint random_point(const ManifoldShape& shape, std::uint64_t seed) {
  if (!shape.valid()) throw DimensionError("random_point: invalid shape");
  std::mt19937_64 gen(seed);
  return FactoredPoint(randn_matrix(shape.K, shape.r, gen), randn_matrix(shape.K, shape.r, gen));
}

TangentVector random_tangent(const FactoredPoint& x, std::uint64_t seed) {
  const ManifoldShape s = x.shape();
  std::mt19937_64 gen(seed);
  for (int attempt = 0; attempt < 16; ++attempt) {
    TangentVector t{randn_matrix(s.K, s.r, gen), randn_matrix(s.K, s.r, gen)};
    t = project_horizontal(x, t);
    const double n = norm(x, t);
    if (n > 1e-12) {
      t *= 1.0 / n;
      return t;
    }
  }
  throw RankDeficiencyError("random_tangent: degenerate point, cannot normalize");
}

}  // namespace tim
