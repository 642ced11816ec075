#pragma once

#include <string>

#include "tim/admission.hpp"

namespace tim {

/// Machine-readable solve report. Stable key order and formatting: the same
/// inputs serialize to the same bytes.
std::string admission_to_json(const NetworkTopology& topo, const AdmissionConfig& cfg,
                              const AdmissionResult& result);

/// One-row CSV with header:
/// K,links,rank,lambda,rho,epsilon,seed,mode,n_admitted,admitted,residual,
/// stage1_iters,completion_iters,feasibility_checks
/// (admitted users joined by ';' in priority order).
std::string admission_to_csv(const NetworkTopology& topo, const AdmissionConfig& cfg,
                             const AdmissionResult& result);

std::string oracle_to_json(const NetworkTopology& topo, const AdmissionConfig& cfg,
                           const OracleResult& result);

}  // namespace tim
