#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "tim/trust_region.hpp"

namespace tim {

/// Connectivity set V of directed interfering pairs (i, j), i != j, over K
/// users. Indices are 1-based user ids; desired links (i, i) are implicit and
/// never stored. Links are kept sorted and unique.
struct NetworkTopology {
  int K = 0;
  std::vector<std::pair<int, int>> links;

  NetworkTopology() = default;
  NetworkTopology(int K_in, std::vector<std::pair<int, int>> links_in);

  bool has_link(int i, int j) const;
  int link_count() const { return static_cast<int>(links.size()); }
};

/// Observed cells of an n x n grid, 0-based, sorted and unique. The implied
/// target is the identity: 1 on diagonal cells, 0 elsewhere.
struct ObservationMask {
  int n = 0;
  std::vector<std::pair<int, int>> entries;

  ObservationMask() = default;
  ObservationMask(int n_in, std::vector<std::pair<int, int>> entries_in);

  static ObservationMask full(int n);
};

/// Mask of the feasibility problem on the submatrix indexed by the sorted
/// user set S: all diagonal cells plus the cross cells whose user pair is an
/// interference link.
ObservationMask feasibility_mask(const NetworkTopology& topo, const std::vector<int>& users);

/// Parameters (lambda, rho, epsilon) of the regularized smoothed l1
/// objective.
struct SmoothedL1Params {
  double lambda = 0.5;
  double rho = 0.01;
  double epsilon = 0.01;
};

/// 0.5 sum_{(i,j) in links} X_ij^2 + rho sum_i (lambda X_ii^2 - sqrt(X_ii^2 + eps^2))
/// with X_ij = row_i(U) . row_j(V).
double sparsity_cost(const FactoredPoint& x, const NetworkTopology& topo,
                     const SmoothedL1Params& p);
TangentVector sparsity_egrad(const FactoredPoint& x, const NetworkTopology& topo,
                             const SmoothedL1Params& p);
TangentVector sparsity_ehess_vec(const FactoredPoint& x, const NetworkTopology& topo,
                                 const SmoothedL1Params& p, const TangentVector& xi);

/// sum_{(i,j) in mask} (X_ij - delta_ij)^2, identity target, no 1/2 factor.
double completion_cost(const FactoredPoint& x, const ObservationMask& mask);
TangentVector completion_egrad(const FactoredPoint& x, const ObservationMask& mask);
TangentVector completion_ehess_vec(const FactoredPoint& x, const ObservationMask& mask,
                                   const TangentVector& xi);

/// Dense U V^T.
Eigen::MatrixXd assemble_matrix(const FactoredPoint& x);
/// Diagonal of U V^T without forming the product.
Eigen::VectorXd extract_diag(const FactoredPoint& x);

/// Sparsity-inducing stage-1 cost as a solver problem.
class SparsityProblem : public CostProblem {
 public:
  SparsityProblem(NetworkTopology topo, int rank, SmoothedL1Params params);

  ManifoldShape shape() const override { return shape_; }
  double cost(const FactoredPoint& x) const override;
  TangentVector euclidean_gradient(const FactoredPoint& x) const override;
  TangentVector euclidean_hessian_vec(const FactoredPoint& x,
                                      const TangentVector& xi) const override;

  const NetworkTopology& topology() const { return topo_; }
  const SmoothedL1Params& params() const { return params_; }

 private:
  NetworkTopology topo_;
  SmoothedL1Params params_;
  ManifoldShape shape_;
  std::vector<std::pair<int, int>> links0_;  // 0-based copies of the links
};

/// Masked least squares ||P_Omega(U V^T - T)||_F^2 as a solver problem. The
/// default target T is the identity (the feasibility / transceiver-design
/// objective); a dense target supports general completion instances.
class CompletionProblem : public CostProblem {
 public:
  CompletionProblem(ObservationMask mask, int rank);
  CompletionProblem(ObservationMask mask, int rank, const Eigen::MatrixXd& target);

  ManifoldShape shape() const override { return shape_; }
  double cost(const FactoredPoint& x) const override;
  TangentVector euclidean_gradient(const FactoredPoint& x) const override;
  TangentVector euclidean_hessian_vec(const FactoredPoint& x,
                                      const TangentVector& xi) const override;

  const ObservationMask& mask() const { return mask_; }

 private:
  ObservationMask mask_;
  ManifoldShape shape_;
  std::vector<double> targets_;  // aligned with mask_.entries
};

}  // namespace tim
