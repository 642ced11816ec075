#include "tim/reporting.hpp"

#include <cstdio>

#include "json.hpp"

namespace tim {

namespace {

using nlohmann::json;

json report_json(const SolveReport& rep) {
  return json{{"outer_iters", rep.outer_iters},
              {"final_cost", rep.final_cost},
              {"final_grad_norm", rep.final_grad_norm},
              {"converged", rep.converged},
              {"termination", to_string(rep.termination_reason)}};
}

json input_json(const NetworkTopology& topo, const AdmissionConfig& cfg) {
  return json{{"K", topo.K},
              {"links", topo.link_count()},
              {"rank", cfg.rank},
              {"lambda", cfg.params.lambda},
              {"rho", cfg.params.rho},
              {"epsilon", cfg.params.epsilon},
              {"feasibility_tol", cfg.feasibility_tol},
              {"restarts", cfg.restarts},
              {"grad_tol", cfg.tr_config.grad_tol},
              {"max_iters", cfg.tr_config.max_outer_iters},
              {"seed", cfg.seed},
              {"mode", cfg.scan ? "scan" : "bisection"}};
}

}  // namespace

std::string admission_to_json(const NetworkTopology& topo, const AdmissionConfig& cfg,
                              const AdmissionResult& result) {
  std::vector<double> diag(result.stage1_diag.data(),
                           result.stage1_diag.data() + result.stage1_diag.size());
  json j{{"input", input_json(topo, cfg)},
         {"result",
          {{"n_admitted", result.n_admitted},
           {"admitted", result.admitted},
           {"priority", result.priority},
           {"stage1_diag", diag},
           {"feasibility_residual", result.feasibility_residual},
           {"feasibility_checks", result.feasibility_checks},
           {"stage1", report_json(result.stage1_report)},
           {"completion", report_json(result.completion_report)}}}};
  return j.dump(2) + "\n";
}

std::string admission_to_csv(const NetworkTopology& topo, const AdmissionConfig& cfg,
                             const AdmissionResult& result) {
  std::string admitted;
  for (std::size_t i = 0; i < result.admitted.size(); ++i) {
    if (i) admitted += ';';
    admitted += std::to_string(result.admitted[i]);
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%.6g", cfg.params.lambda, cfg.params.rho,
                cfg.params.epsilon);
  std::string out =
      "K,links,rank,lambda,rho,epsilon,seed,mode,n_admitted,admitted,residual,"
      "stage1_iters,completion_iters,feasibility_checks\n";
  char resid[64];
  std::snprintf(resid, sizeof(resid), "%.6g", result.feasibility_residual);
  out += std::to_string(topo.K) + ',' + std::to_string(topo.link_count()) + ',' +
         std::to_string(cfg.rank) + ',' + buf + ',' + std::to_string(cfg.seed) + ',' +
         (cfg.scan ? "scan" : "bisection") + ',' + std::to_string(result.n_admitted) + ',' +
         admitted + ',' + resid + ',' + std::to_string(result.stage1_report.outer_iters) + ',' +
         std::to_string(result.completion_report.outer_iters) + ',' +
         std::to_string(result.feasibility_checks) + '\n';
  return out;
}

std::string oracle_to_json(const NetworkTopology& topo, const AdmissionConfig& cfg,
                           const OracleResult& result) {
  json j{{"input", input_json(topo, cfg)},
         {"result",
          {{"n_max", result.n_max},
           {"best_set", result.best_set},
           {"feasibility_checks", result.feasibility_checks}}}};
  return j.dump(2) + "\n";
}

}  // namespace tim
