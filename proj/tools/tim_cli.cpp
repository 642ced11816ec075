// Command-line front end for topology generation, admission solves, batch
// sweeps and the built-in diagnostic suite.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tim/admission.hpp"
#include "tim/experiment.hpp"
#include "tim/reporting.hpp"
#include "tim/selfcheck.hpp"
#include "tim/topology_io.hpp"

namespace {

struct SolveFlags {
  int rank = 1;
  double lambda = 0.5;
  double rho = 0.01;
  double epsilon = 0.01;
  double grad_tol = 1e-6;
  int max_iters = 500;
  double feas_tol = 1e-3;
  int restarts = 3;
  std::uint64_t seed = 0;
  bool scan = false;
};

void add_solver_flags(CLI::App* cmd, SolveFlags& f, bool with_rank) {
  if (with_rank) cmd->add_option("--rank", f.rank, "channel uses r (DoF = 1/r)")->required();
  cmd->add_option("--lambda", f.lambda, "quadratic weight of the smoothed objective");
  cmd->add_option("--rho", f.rho, "regularization weight");
  cmd->add_option("--epsilon", f.epsilon, "smoothing parameter");
  cmd->add_option("--grad-tol", f.grad_tol, "gradient-norm stopping tolerance");
  cmd->add_option("--max-iters", f.max_iters, "outer iteration cap");
  cmd->add_option("--feas-tol", f.feas_tol, "feasibility residual tolerance");
  cmd->add_option("--restarts", f.restarts, "random restarts per feasibility solve");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_flag("--scan", f.scan, "linear prefix scan instead of bisection");
}

tim::AdmissionConfig to_config(const SolveFlags& f) {
  tim::AdmissionConfig cfg;
  cfg.rank = f.rank;
  cfg.params = tim::SmoothedL1Params{f.lambda, f.rho, f.epsilon};
  cfg.feasibility_tol = f.feas_tol;
  cfg.restarts = f.restarts;
  cfg.tr_config.grad_tol = f.grad_tol;
  cfg.tr_config.max_outer_iters = f.max_iters;
  cfg.seed = f.seed;
  cfg.scan = f.scan;
  return cfg;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw tim::ParseError("cannot open for writing: " + out_path);
  out << text;
}

void print_report_line(const char* name, const tim::SolveReport& rep) {
  std::printf("%s: %d iters, cost %.3e, grad %.3e (%s)\n", name, rep.outer_iters, rep.final_cost,
              rep.final_grad_norm, tim::to_string(rep.termination_reason));
}

int run(int argc, char** argv) {
  CLI::App app{"User admission control for topological interference management"};
  app.require_subcommand(1);

  // gen-topology
  auto* gen = app.add_subcommand("gen-topology", "sample a random network topology");
  int gen_users = 8, gen_links = 45;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--users", gen_users, "number of users K")->required();
  gen->add_option("--links", gen_links, "number of directed interference links")->required();
  gen->add_option("--seed", gen_seed, "sampling seed");
  gen->add_option("-o,--output", gen_out, "output file (default stdout)");

  // solve
  auto* solve = app.add_subcommand("solve", "run the admission pipeline on a topology file");
  std::string solve_path, solve_emit, solve_out;
  SolveFlags solve_flags;
  solve->add_option("topology", solve_path, "topology file")->required();
  add_solver_flags(solve, solve_flags, true);
  solve->add_option("--emit", solve_emit, "structured output format (json|csv)")
      ->check(CLI::IsMember({"json", "csv"}));
  solve->add_option("-o,--output", solve_out, "write structured output to a file");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "exhaustive-search admission on a topology file");
  std::string oracle_path, oracle_emit, oracle_out;
  SolveFlags oracle_flags;
  oracle->add_option("topology", oracle_path, "topology file")->required();
  add_solver_flags(oracle, oracle_flags, true);
  oracle->add_option("--emit", oracle_emit, "structured output format (json)")
      ->check(CLI::IsMember({"json"}));
  oracle->add_option("-o,--output", oracle_out, "write structured output to a file");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "batch experiment over (r, lambda) cells");
  tim::ExperimentSpec spec;
  SolveFlags sweep_flags;
  std::string sweep_mode = "all", sweep_out;
  spec.r_values.clear();
  spec.lambda_values.clear();
  sweep->add_option("--users", spec.K, "number of users K");
  sweep->add_option("--links", spec.link_count, "number of directed interference links");
  sweep->add_option("--ranks", spec.r_values, "rank values, comma separated")
      ->required()
      ->delimiter(',');
  sweep->add_option("--lambdas", spec.lambda_values, "lambda values, comma separated")
      ->delimiter(',');
  sweep->add_option("--realizations", spec.realizations, "instances per cell");
  sweep->add_option("--mode", sweep_mode, "pipeline|oracle|baseline|all");
  sweep->add_option("--jobs", spec.jobs, "concurrent realizations");
  add_solver_flags(sweep, sweep_flags, false);
  sweep->add_option("-o,--output", sweep_out, "output CSV file (default stdout)");

  // check
  auto* check = app.add_subcommand("check", "run the invariant and derivative test suite");
  std::uint64_t check_seed = 0;
  check->add_option("--seed", check_seed, "suite seed");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    emit(tim::format_topology(tim::gen_topology(gen_users, gen_links, gen_seed)), gen_out);
    return 0;
  }

  if (solve->parsed()) {
    const tim::NetworkTopology topo = tim::read_topology(solve_path);
    const tim::AdmissionConfig cfg = to_config(solve_flags);
    const tim::AdmissionResult result = tim::run_pipeline(topo, cfg);
    if (solve_emit == "json") {
      emit(tim::admission_to_json(topo, cfg, result), solve_out);
    } else if (solve_emit == "csv") {
      emit(tim::admission_to_csv(topo, cfg, result), solve_out);
    } else {
      std::printf("K=%d links=%d rank=%d lambda=%g seed=%llu mode=%s\n", topo.K,
                  topo.link_count(), cfg.rank, cfg.params.lambda,
                  static_cast<unsigned long long>(cfg.seed), cfg.scan ? "scan" : "bisection");
      std::printf("admitted %d user(s):", result.n_admitted);
      for (int u : result.admitted) std::printf(" %d", u);
      std::printf("\npriority:");
      for (int u : result.priority) std::printf(" %d", u);
      std::printf("\nfeasibility residual: %.3e (tol %.3e * sqrt(%d))\n",
                  result.feasibility_residual, cfg.feasibility_tol, result.n_admitted);
      print_report_line("stage1", result.stage1_report);
      print_report_line("completion", result.completion_report);
      std::printf("feasibility checks: %d\n", result.feasibility_checks);
    }
    return 0;
  }

  if (oracle->parsed()) {
    const tim::NetworkTopology topo = tim::read_topology(oracle_path);
    const tim::AdmissionConfig cfg = to_config(oracle_flags);
    const tim::OracleResult result = tim::exhaustive_oracle(topo, cfg);
    if (oracle_emit == "json") {
      emit(tim::oracle_to_json(topo, cfg, result), oracle_out);
    } else {
      std::printf("n_max=%d set:", result.n_max);
      for (int u : result.best_set) std::printf(" %d", u);
      std::printf("\nfeasibility checks: %d\n", result.feasibility_checks);
    }
    return 0;
  }

  if (sweep->parsed()) {
    spec.mode = tim::sweep_mode_from_string(sweep_mode);
    spec.seed = sweep_flags.seed;
    spec.base = to_config(SolveFlags{/*rank=*/1, sweep_flags.lambda, sweep_flags.rho,
                                     sweep_flags.epsilon, sweep_flags.grad_tol,
                                     sweep_flags.max_iters, sweep_flags.feas_tol,
                                     sweep_flags.restarts, sweep_flags.seed, sweep_flags.scan});
    if (spec.lambda_values.empty()) spec.lambda_values = {sweep_flags.lambda};
    const tim::SweepResult result = tim::run_sweep(spec);
    emit(tim::sweep_to_csv(result), sweep_out);
    if (result.failures > 0)
      std::fprintf(stderr, "warning: %d solve(s) failed and were excluded from the means\n",
                   result.failures);
    return 0;
  }

  if (check->parsed()) {
    const auto results = tim::run_selfcheck(check_seed);
    for (const auto& r : results)
      std::printf("%-34s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str());
    const bool ok = tim::all_passed(results);
    std::printf("%zu/%zu checks passed\n",
                results.size() - static_cast<std::size_t>(std::count_if(
                                     results.begin(), results.end(),
                                     [](const tim::CheckResult& r) { return !r.pass; })),
                results.size());
    return ok ? 0 : 1;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
