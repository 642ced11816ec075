#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tim/admission.hpp"

namespace tim {

enum class SweepMode { pipeline, oracle, baseline, all };

SweepMode sweep_mode_from_string(const std::string& s);
const char* to_string(SweepMode m);

/// One batch experiment: for every (r, lambda) cell, `realizations` seeded
/// topology instances, each run through the requested methods. Topology and
/// solver seeds depend only on (seed, realization index), so instances are
/// identical across cells and individually re-runnable.
struct ExperimentSpec {
  int K = 8;
  int link_count = 45;
  std::vector<int> r_values = {4};
  std::vector<double> lambda_values = {0.5};
  int realizations = 50;
  std::uint64_t seed = 0;
  SweepMode mode = SweepMode::all;
  AdmissionConfig base;  ///< rank, lambda and seed are overwritten per cell
  int jobs = 1;
};

struct SweepRow {
  int K = 0;
  int links = 0;
  int r = 0;
  double lambda = 0.0;
  std::string method;
  double mean_admitted = 0.0;
  double stderr_admitted = 0.0;
  int n = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  ///< ordered by (r, lambda, method)
  int failures = 0;            ///< solves that raised a stage error, excluded from means
};

/// Per-instance seeds used by run_sweep, exposed so single instances can be
/// reproduced from the command line.
std::uint64_t instance_topology_seed(std::uint64_t master_seed, int realization);
std::uint64_t instance_solver_seed(std::uint64_t master_seed, int realization);

SweepResult run_sweep(const ExperimentSpec& spec);

/// Fixed schema: K,links,r,lambda,method,mean_admitted,stderr,n
std::string sweep_to_csv(const SweepResult& result);

}  // namespace tim
