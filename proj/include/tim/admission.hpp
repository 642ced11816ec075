#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tim/objectives.hpp"
#include "tim/trust_region.hpp"

namespace tim {

/// Pipeline controls. `rank` is the number of channel uses r (DoF = 1/r).
struct AdmissionConfig {
  int rank = 1;
  SmoothedL1Params params;
  double feasibility_tol = 1e-3;  ///< residual test ||P_Omega(X) - I||_F / sqrt(|S|)
  int restarts = 3;               ///< random restarts per feasibility solve
  TrustRegionConfig tr_config;
  std::uint64_t seed = 0;
  bool scan = false;  ///< linear prefix scan instead of bisection
};

/// A pipeline stage failed; `stage` names it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage_in, const std::string& what)
      : std::runtime_error(stage_in + ": " + what), stage(std::move(stage_in)) {}
  std::string stage;
};

/// Transceiver design failed to reach the tolerance that the feasibility
/// stage certified.
class InconsistencyError : public std::runtime_error {
 public:
  explicit InconsistencyError(const std::string& what) : std::runtime_error(what) {}
};

struct Stage1Result {
  FactoredPoint point;
  Eigen::VectorXd diag;       ///< z* = diag(X*)
  std::vector<int> priority;  ///< pi: user ids sorted by |z*| descending, ties by id
  SolveReport report;
};

struct FeasibilityResult {
  bool feasible = false;
  double residual = 0.0;  ///< best Frobenius residual over restarts
  FactoredPoint point;    ///< best factor pair; rows follow the sorted user set
  int solves = 0;         ///< trust-region solves actually run
};

struct AdmitResult {
  int n0 = 0;
  std::vector<int> admitted;  ///< prefix of pi, in priority order
  int feasibility_checks = 0;
};

struct DesignResult {
  FactoredPoint point;  ///< rows follow the sorted admitted set
  double residual = 0.0;
  SolveReport report;
};

struct AdmissionResult {
  std::vector<int> priority;
  std::vector<int> admitted;
  int n_admitted = 0;
  Eigen::VectorXd stage1_diag;
  FactoredPoint final_point;
  double feasibility_residual = 0.0;
  SolveReport stage1_report;
  SolveReport completion_report;
  int feasibility_checks = 0;
};

/// Stage 1: solve the sparsity-inducing problem from a seeded random start
/// and sort users by decreasing |diagonal|.
Stage1Result induce_sparsity(const NetworkTopology& topo, const AdmissionConfig& cfg);

/// Solves the masked completion problem on the sorted user set S with
/// cfg.restarts seeded starts; feasible iff best residual / sqrt(|S|) is
/// within cfg.feasibility_tol. Sets with |S| <= rank are certified by the
/// identity without solving. Never throws on solver failure: an unreachable
/// tolerance is an infeasible verdict. Restart seeds depend only on
/// (cfg.seed, contents of S), so verdicts are reproducible and independent of
/// enumeration order.
FeasibilityResult feasibility_check(const NetworkTopology& topo, const std::vector<int>& users,
                                    const AdmissionConfig& cfg);

/// Stage 2, bisection over priority prefixes: the largest m with S^[m]
/// feasible under the loop invariant (feasible => N_low = i). Runs at most
/// ceil(log2 K) + 1 feasibility solves, seeded as in feasibility_check.
AdmitResult bisection_admit(const NetworkTopology& topo, const std::vector<int>& pi,
                            const AdmissionConfig& cfg);

/// Conservative alternative: checks every prefix and returns the largest
/// feasible one.
AdmitResult scan_admit(const NetworkTopology& topo, const std::vector<int>& pi,
                       const AdmissionConfig& cfg);

/// Stage 3: re-solves completion on the admitted set; rows of U are the
/// decoders and rows of V the precoders, in ascending user order. Throws
/// InconsistencyError if the certified tolerance cannot be reproduced.
DesignResult design_transceivers(const NetworkTopology& topo, const std::vector<int>& users,
                                 const AdmissionConfig& cfg);

struct OracleResult {
  int n_max = 0;
  std::vector<int> best_set;
  int feasibility_checks = 0;
};

/// Exhaustive search: enumerates subsets by decreasing cardinality
/// (lexicographic within a cardinality) and returns the first feasible one.
/// Refuses K > 16.
OracleResult exhaustive_oracle(const NetworkTopology& topo, const AdmissionConfig& cfg);

/// TDMA/FDMA-style scheduling admits exactly min(r, K) users at DoF 1/r.
int orthogonal_baseline(int K, int rank);

/// Algorithm 1 end to end: induce_sparsity -> (bisection|scan) ->
/// design_transceivers.
AdmissionResult run_pipeline(const NetworkTopology& topo, const AdmissionConfig& cfg);

}  // namespace tim
