#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "tim/errors.hpp"

namespace tim {

/// Dimensions of the search space: rank-r K x K matrices factored as U V^T.
struct ManifoldShape {
  int K = 0;  ///< matrix side length
  int r = 0;  ///< rank parameter, 1 <= r <= K

  bool valid() const { return r >= 1 && K >= r; }
  bool operator==(const ManifoldShape& o) const { return K == o.K && r == o.r; }
  bool operator!=(const ManifoldShape& o) const { return !(*this == o); }

  /// Dimension of the quotient space, 2Kr - r^2. Used as the default
  /// truncated-CG iteration cap.
  int quotient_dim() const { return 2 * K * r - r * r; }
};

/// A point x = (U, V) of the total space, representing X = U V^T.
///
/// The checked constructor rejects rank-deficient factors (smallest Gram
/// pivot below 1e-12 of the largest). `unchecked` never throws and instead
/// raises `cond_warning`; retraction uses it because a plain additive step
/// may leave the full-rank stratum.
struct FactoredPoint {
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;
  /// True when a Gram matrix condition estimate exceeds 1e10 (or the point
  /// was built unchecked and is outright rank-deficient).
  bool cond_warning = false;

  FactoredPoint() = default;
  FactoredPoint(Eigen::MatrixXd U_in, Eigen::MatrixXd V_in);
  static FactoredPoint unchecked(Eigen::MatrixXd U_in, Eigen::MatrixXd V_in);

  ManifoldShape shape() const {
    return ManifoldShape{static_cast<int>(U.rows()), static_cast<int>(U.cols())};
  }
};

/// An ambient tangent pair (Z_U, Z_V); horizontal only after projection.
struct TangentVector {
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;

  static TangentVector zero(const ManifoldShape& s) {
    return TangentVector{Eigen::MatrixXd::Zero(s.K, s.r), Eigen::MatrixXd::Zero(s.K, s.r)};
  }
  ManifoldShape shape() const {
    return ManifoldShape{static_cast<int>(U.rows()), static_cast<int>(U.cols())};
  }

  TangentVector& operator+=(const TangentVector& o) {
    U += o.U;
    V += o.V;
    return *this;
  }
  TangentVector& operator-=(const TangentVector& o) {
    U -= o.U;
    V -= o.V;
    return *this;
  }
  TangentVector& operator*=(double a) {
    U *= a;
    V *= a;
    return *this;
  }
};

inline TangentVector operator+(TangentVector a, const TangentVector& b) { return a += b; }
inline TangentVector operator-(TangentVector a, const TangentVector& b) { return a -= b; }
inline TangentVector operator*(double s, TangentVector a) { return a *= s; }
inline TangentVector operator-(TangentVector a) { return a *= -1.0; }

/// Riemannian metric Tr((V^T V) xi_U^T eta_U) + Tr((U^T U) xi_V^T eta_V).
/// Invariant under (U, V) -> (U M^{-1}, V M^T) with tangents lifted the same
/// way, so it descends to the quotient.
double inner(const FactoredPoint& x, const TangentVector& xi, const TangentVector& eta);

/// Metric norm sqrt(inner(x, xi, xi)).
double norm(const FactoredPoint& x, const TangentVector& xi);

/// Orthogonal projection of an ambient pair onto the horizontal space
/// { zeta : U^T zeta_U V^T V = U^T U zeta_V^T V }. Returns
/// (eta_U + U L, eta_V - V L^T) with
/// L = 0.5 (eta_V^T V (V^T V)^{-1} - (U^T U)^{-1} U^T eta_U).
TangentVector project_horizontal(const FactoredPoint& x, const TangentVector& eta);

/// Frobenius residual of the horizontal-space equation; zero (to roundoff)
/// for horizontal vectors. Exposed for diagnostics.
double horizontal_residual(const FactoredPoint& x, const TangentVector& xi);

/// Converts Euclidean partial derivatives (df/dU, df/dV) into the Riemannian
/// gradient (df/dU (V^T V)^{-1}, df/dV (U^T U)^{-1}).
TangentVector riemannian_gradient(const FactoredPoint& x, const TangentVector& egrad);

/// Horizontal lift of Hess f[xi]: directional derivative of the Riemannian
/// gradient field along xi, plus the connection correction for the
/// non-constant metric, then projected horizontal. `ehess` must hold the
/// Euclidean Hessian-vector product (directional derivative of the Euclidean
/// partials along xi); `xi` must be horizontal.
TangentVector riemannian_hessian(const FactoredPoint& x, const TangentVector& egrad,
                                 const TangentVector& ehess, const TangentVector& xi);

/// Additive retraction (U + xi_U, V + xi_V). Never throws; the result
/// carries cond_warning if its conditioning degraded.
FactoredPoint retract(const FactoredPoint& x, const TangentVector& xi);

/// Point with i.i.d. standard normal factor entries (full rank w.p. 1).
FactoredPoint random_point(const ManifoldShape& shape, std::uint64_t seed);

/// Random horizontal direction of unit metric norm.
TangentVector random_tangent(const FactoredPoint& x, std::uint64_t seed);

namespace detail {

/// Cholesky-type factorizations of both Gram matrices, with the pivot-ratio
/// rank test applied. Ops that need Gram inverses factor once per call.
struct GramFactors {
  Eigen::MatrixXd gu;  ///< U^T U
  Eigen::MatrixXd gv;  ///< V^T V
  Eigen::LDLT<Eigen::MatrixXd> gu_ldlt;
  Eigen::LDLT<Eigen::MatrixXd> gv_ldlt;
};

GramFactors factor_grams(const FactoredPoint& x);

/// Right-solve M A^{-1} for symmetric positive definite A.
Eigen::MatrixXd rsolve(const Eigen::LDLT<Eigen::MatrixXd>& A, const Eigen::MatrixXd& M);

void require_same_shape(const ManifoldShape& a, const ManifoldShape& b, const char* where);

}  // namespace detail

}  // namespace tim
