#include "tim/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tim {

namespace {

void require_shape(const FactoredPoint& x, int n, const char* where) {
  if (x.shape().K != n)
    throw DimensionError(std::string(where) + ": point side " + std::to_string(x.shape().K) +
                         " does not match " + std::to_string(n));
}

void require_xi(const FactoredPoint& x, const TangentVector& xi, const char* where) {
  detail::require_same_shape(x.shape(), xi.shape(), where);
}

double entry(const FactoredPoint& x, int i, int j) { return x.U.row(i).dot(x.V.row(j)); }

double entry_dot(const FactoredPoint& x, const TangentVector& xi, int i, int j) {
  return xi.U.row(i).dot(x.V.row(j)) + x.U.row(i).dot(xi.V.row(j));
}

void require_params(const SmoothedL1Params& p) {
  if (!(p.epsilon > 0.0)) throw ArgumentError("SmoothedL1Params: epsilon must be positive");
  if (p.lambda < 0.0 || p.rho < 0.0)
    throw ArgumentError("SmoothedL1Params: lambda and rho must be nonnegative");
}

std::vector<std::pair<int, int>> to_zero_based(const NetworkTopology& topo) {
  std::vector<std::pair<int, int>> out;
  out.reserve(topo.links.size());
  for (const auto& [i, j] : topo.links) out.emplace_back(i - 1, j - 1);
  return out;
}

double sparsity_cost_impl(const FactoredPoint& x,
                          const std::vector<std::pair<int, int>>& links0,
                          const SmoothedL1Params& p) {
  double link_term = 0.0;
  for (const auto& [i, j] : links0) {
    const double v = entry(x, i, j);
    link_term += v * v;
  }
  double diag_term = 0.0;
  const int K = x.shape().K;
  for (int i = 0; i < K; ++i) {
    const double z = entry(x, i, i);
    diag_term += p.lambda * z * z - std::sqrt(z * z + p.epsilon * p.epsilon);
  }
  return 0.5 * link_term + p.rho * diag_term;
}

TangentVector sparsity_egrad_impl(const FactoredPoint& x,
                                  const std::vector<std::pair<int, int>>& links0,
                                  const SmoothedL1Params& p) {
  TangentVector g = TangentVector::zero(x.shape());
  // Residual matrix S is sparse: S_ij = X_ij on links, S_ii from the smoothed
  // diagonal term; egrad = (S V, S^T U) accumulated row-wise.
  for (const auto& [i, j] : links0) {
    const double s = entry(x, i, j);
    g.U.row(i) += s * x.V.row(j);
    g.V.row(j) += s * x.U.row(i);
  }
  const int K = x.shape().K;
  for (int i = 0; i < K; ++i) {
    const double z = entry(x, i, i);
    const double s = p.rho * (2.0 * p.lambda * z - z / std::sqrt(z * z + p.epsilon * p.epsilon));
    g.U.row(i) += s * x.V.row(i);
    g.V.row(i) += s * x.U.row(i);
  }
  return g;
}

TangentVector sparsity_ehess_impl(const FactoredPoint& x,
                                  const std::vector<std::pair<int, int>>& links0,
                                  const SmoothedL1Params& p, const TangentVector& xi) {
  TangentVector h = TangentVector::zero(x.shape());
  for (const auto& [i, j] : links0) {
    const double s = entry(x, i, j);
    const double sdot = entry_dot(x, xi, i, j);
    h.U.row(i) += sdot * x.V.row(j) + s * xi.V.row(j);
    h.V.row(j) += sdot * x.U.row(i) + s * xi.U.row(i);
  }
  const int K = x.shape().K;
  const double eps2 = p.epsilon * p.epsilon;
  for (int i = 0; i < K; ++i) {
    const double z = entry(x, i, i);
    const double zdot = entry_dot(x, xi, i, i);
    const double root = std::sqrt(z * z + eps2);
    const double s = p.rho * (2.0 * p.lambda * z - z / root);
    const double sprime = p.rho * (2.0 * p.lambda - eps2 / (root * root * root));
    h.U.row(i) += sprime * zdot * x.V.row(i) + s * xi.V.row(i);
    h.V.row(i) += sprime * zdot * x.U.row(i) + s * xi.U.row(i);
  }
  return h;
}

double completion_cost_impl(const FactoredPoint& x,
                            const std::vector<std::pair<int, int>>& entries,
                            const std::vector<double>& targets) {
  double c = 0.0;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const double r = entry(x, entries[e].first, entries[e].second) - targets[e];
    c += r * r;
  }
  return c;
}

TangentVector completion_egrad_impl(const FactoredPoint& x,
                                    const std::vector<std::pair<int, int>>& entries,
                                    const std::vector<double>& targets) {
  TangentVector g = TangentVector::zero(x.shape());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto [i, j] = entries[e];
    const double r = entry(x, i, j) - targets[e];
    g.U.row(i) += 2.0 * r * x.V.row(j);
    g.V.row(j) += 2.0 * r * x.U.row(i);
  }
  return g;
}

TangentVector completion_ehess_impl(const FactoredPoint& x,
                                    const std::vector<std::pair<int, int>>& entries,
                                    const std::vector<double>& targets,
                                    const TangentVector& xi) {
  TangentVector h = TangentVector::zero(x.shape());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto [i, j] = entries[e];
    const double r = entry(x, i, j) - targets[e];
    const double rdot = entry_dot(x, xi, i, j);
    h.U.row(i) += 2.0 * (rdot * x.V.row(j) + r * xi.V.row(j));
    h.V.row(j) += 2.0 * (rdot * x.U.row(i) + r * xi.U.row(i));
  }
  return h;
}

std::vector<double> identity_targets(const ObservationMask& mask) {
  std::vector<double> t(mask.entries.size());
  for (std::size_t e = 0; e < mask.entries.size(); ++e)
    t[e] = mask.entries[e].first == mask.entries[e].second ? 1.0 : 0.0;
  return t;
}

}  // namespace

NetworkTopology::NetworkTopology(int K_in, std::vector<std::pair<int, int>> links_in)
    : K(K_in), links(std::move(links_in)) {
  if (K < 1) throw ArgumentError("NetworkTopology: K must be positive");
  for (const auto& [i, j] : links) {
    if (i < 1 || i > K || j < 1 || j > K)
      throw ArgumentError("NetworkTopology: link index out of [1, K]");
    if (i == j) throw ArgumentError("NetworkTopology: self-link (i, i) not allowed");
  }
  std::sort(links.begin(), links.end());
  if (std::adjacent_find(links.begin(), links.end()) != links.end())
    throw ArgumentError("NetworkTopology: duplicate link");
}

bool NetworkTopology::has_link(int i, int j) const {
  return std::binary_search(links.begin(), links.end(), std::make_pair(i, j));
}

ObservationMask::ObservationMask(int n_in, std::vector<std::pair<int, int>> entries_in)
    : n(n_in), entries(std::move(entries_in)) {
  if (n < 1) throw ArgumentError("ObservationMask: n must be positive");
  for (const auto& [i, j] : entries)
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw ArgumentError("ObservationMask: entry out of range");
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
}

ObservationMask ObservationMask::full(int n) {
  std::vector<std::pair<int, int>> e;
  e.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) e.emplace_back(i, j);
  return ObservationMask(n, std::move(e));
}

ObservationMask feasibility_mask(const NetworkTopology& topo, const std::vector<int>& users) {
  if (users.empty()) throw ArgumentError("feasibility_mask: empty user set");
  std::vector<int> s = users;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw ArgumentError("feasibility_mask: duplicate user");
  if (s.front() < 1 || s.back() > topo.K)
    throw ArgumentError("feasibility_mask: user id out of [1, K]");
  const int m = static_cast<int>(s.size());
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a < m; ++a) {
    e.emplace_back(a, a);
    for (int b = 0; b < m; ++b)
      if (a != b && topo.has_link(s[a], s[b])) e.emplace_back(a, b);
  }
  return ObservationMask(m, std::move(e));
}

double sparsity_cost(const FactoredPoint& x, const NetworkTopology& topo,
                     const SmoothedL1Params& p) {
  require_shape(x, topo.K, "sparsity_cost");
  require_params(p);
  return sparsity_cost_impl(x, to_zero_based(topo), p);
}

TangentVector sparsity_egrad(const FactoredPoint& x, const NetworkTopology& topo,
                             const SmoothedL1Params& p) {
  require_shape(x, topo.K, "sparsity_egrad");
  require_params(p);
  return sparsity_egrad_impl(x, to_zero_based(topo), p);
}

TangentVector sparsity_ehess_vec(const FactoredPoint& x, const NetworkTopology& topo,
                                 const SmoothedL1Params& p, const TangentVector& xi) {
  require_shape(x, topo.K, "sparsity_ehess_vec");
  require_xi(x, xi, "sparsity_ehess_vec");
  require_params(p);
  return sparsity_ehess_impl(x, to_zero_based(topo), p, xi);
}

double completion_cost(const FactoredPoint& x, const ObservationMask& mask) {
  require_shape(x, mask.n, "completion_cost");
  return completion_cost_impl(x, mask.entries, identity_targets(mask));
}

TangentVector completion_egrad(const FactoredPoint& x, const ObservationMask& mask) {
  require_shape(x, mask.n, "completion_egrad");
  return completion_egrad_impl(x, mask.entries, identity_targets(mask));
}

TangentVector completion_ehess_vec(const FactoredPoint& x, const ObservationMask& mask,
                                   const TangentVector& xi) {
  require_shape(x, mask.n, "completion_ehess_vec");
  require_xi(x, xi, "completion_ehess_vec");
  return completion_ehess_impl(x, mask.entries, identity_targets(mask), xi);
}

Eigen::MatrixXd assemble_matrix(const FactoredPoint& x) { return x.U * x.V.transpose(); }

Eigen::VectorXd extract_diag(const FactoredPoint& x) {
  const int K = x.shape().K;
  Eigen::VectorXd d(K);
  for (int i = 0; i < K; ++i) d(i) = entry(x, i, i);
  return d;
}

SparsityProblem::SparsityProblem(NetworkTopology topo, int rank, SmoothedL1Params params)
    : topo_(std::move(topo)), params_(params), shape_{topo_.K, rank} {
  if (!shape_.valid()) throw ArgumentError("SparsityProblem: need 1 <= rank <= K");
  require_params(params_);
  links0_ = to_zero_based(topo_);
}

double SparsityProblem::cost(const FactoredPoint& x) const {
  require_shape(x, shape_.K, "SparsityProblem::cost");
  return sparsity_cost_impl(x, links0_, params_);
}

TangentVector SparsityProblem::euclidean_gradient(const FactoredPoint& x) const {
  require_shape(x, shape_.K, "SparsityProblem::euclidean_gradient");
  return sparsity_egrad_impl(x, links0_, params_);
}

TangentVector SparsityProblem::euclidean_hessian_vec(const FactoredPoint& x,
                                                     const TangentVector& xi) const {
  require_shape(x, shape_.K, "SparsityProblem::euclidean_hessian_vec");
  return sparsity_ehess_impl(x, links0_, params_, xi);
}

CompletionProblem::CompletionProblem(ObservationMask mask, int rank)
    : mask_(std::move(mask)), shape_{mask_.n, rank} {
  if (!shape_.valid()) throw ArgumentError("CompletionProblem: need 1 <= rank <= n");
  targets_ = identity_targets(mask_);
}

CompletionProblem::CompletionProblem(ObservationMask mask, int rank, const Eigen::MatrixXd& target)
    : mask_(std::move(mask)), shape_{mask_.n, rank} {
  if (!shape_.valid()) throw ArgumentError("CompletionProblem: need 1 <= rank <= n");
  if (target.rows() != mask_.n || target.cols() != mask_.n)
    throw DimensionError("CompletionProblem: target must be n x n");
  targets_.reserve(mask_.entries.size());
  for (const auto& [i, j] : mask_.entries) targets_.push_back(target(i, j));
}

double CompletionProblem::cost(const FactoredPoint& x) const {
  require_shape(x, shape_.K, "CompletionProblem::cost");
  return completion_cost_impl(x, mask_.entries, targets_);
}

TangentVector CompletionProblem::euclidean_gradient(const FactoredPoint& x) const {
  require_shape(x, shape_.K, "CompletionProblem::euclidean_gradient");
  return completion_egrad_impl(x, mask_.entries, targets_);
}

TangentVector CompletionProblem::euclidean_hessian_vec(const FactoredPoint& x,
                                                       const TangentVector& xi) const {
  require_shape(x, shape_.K, "CompletionProblem::euclidean_hessian_vec");
  require_xi(x, xi, "CompletionProblem::euclidean_hessian_vec");
  return completion_ehess_impl(x, mask_.entries, targets_, xi);
}

}  // namespace tim
