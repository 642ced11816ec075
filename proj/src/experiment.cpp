#include "tim/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <optional>

#include "tim/parallel.hpp"
#include "tim/rng.hpp"
#include "tim/topology_io.hpp"

namespace tim {

namespace {

constexpr std::uint64_t kTopoTag = 0x7090u;
constexpr std::uint64_t kSolveTag = 0x501eu;

struct CellStats {
  double mean = 0.0;
  double stderr_mean = 0.0;
  int n = 0;
};

CellStats stats(const std::vector<double>& values) {
  CellStats s;
  s.n = static_cast<int>(values.size());
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_mean = std::sqrt(ss / (s.n - 1)) / std::sqrt(double(s.n));
  }
  return s;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

SweepMode sweep_mode_from_string(const std::string& s) {
  if (s == "pipeline") return SweepMode::pipeline;
  if (s == "oracle") return SweepMode::oracle;
  if (s == "baseline") return SweepMode::baseline;
  if (s == "all") return SweepMode::all;
  throw ArgumentError("unknown sweep mode: " + s);
}

const char* to_string(SweepMode m) {
  switch (m) {
    case SweepMode::pipeline: return "pipeline";
    case SweepMode::oracle: return "oracle";
    case SweepMode::baseline: return "baseline";
    case SweepMode::all: return "all";
  }
  return "unknown";
}

std::uint64_t instance_topology_seed(std::uint64_t master_seed, int realization) {
  return mix_seed(mix_seed(master_seed, realization), kTopoTag);
}

std::uint64_t instance_solver_seed(std::uint64_t master_seed, int realization) {
  return mix_seed(mix_seed(master_seed, realization), kSolveTag);
}

SweepResult run_sweep(const ExperimentSpec& spec) {
  if (spec.realizations < 1) throw ArgumentError("ExperimentSpec: realizations must be >= 1");
  const long long max_links = static_cast<long long>(spec.K) * (spec.K - 1);
  if (spec.link_count < 0 || spec.link_count > max_links)
    throw ArgumentError("ExperimentSpec: link_count must lie in [0, K(K-1)]");
  if (spec.r_values.empty() || spec.lambda_values.empty())
    throw ArgumentError("ExperimentSpec: r_values and lambda_values must be non-empty");

  const bool want_pipeline = spec.mode == SweepMode::pipeline || spec.mode == SweepMode::all;
  const bool want_oracle =
      (spec.mode == SweepMode::oracle || spec.mode == SweepMode::all) && spec.K <= 16;
  const bool want_baseline = spec.mode == SweepMode::baseline || spec.mode == SweepMode::all;

  // Topologies are shared by every (r, lambda) cell; generate once.
  std::vector<NetworkTopology> topologies(spec.realizations);
  for (int i = 0; i < spec.realizations; ++i)
    topologies[i] = gen_topology(spec.K, spec.link_count, instance_topology_seed(spec.seed, i));

  SweepResult result;
  for (int r : spec.r_values) {
    // The oracle ignores lambda; compute it once per r across the lambda list.
    std::vector<std::optional<int>> oracle_cache(spec.realizations);
    bool oracle_done = false;

    for (double lambda : spec.lambda_values) {
      std::vector<std::optional<int>> pipeline_n(spec.realizations);
      std::vector<int> baseline_n(spec.realizations, 0);

      parallel_for(spec.realizations, spec.jobs, [&](int i) {
        AdmissionConfig cfg = spec.base;
        cfg.rank = r;
        cfg.params.lambda = lambda;
        cfg.seed = instance_solver_seed(spec.seed, i);
        if (want_pipeline) {
          try {
            pipeline_n[i] = run_pipeline(topologies[i], cfg).n_admitted;
          } catch (const std::runtime_error&) {
            pipeline_n[i] = std::nullopt;
          }
        }
        if (want_oracle && !oracle_done) oracle_cache[i] = exhaustive_oracle(topologies[i], cfg).n_max;
        if (want_baseline) baseline_n[i] = orthogonal_baseline(spec.K, r);
      });
      oracle_done = oracle_done || want_oracle;

      auto emit = [&](const char* method, const std::vector<double>& values) {
        const CellStats s = stats(values);
        result.rows.push_back(SweepRow{spec.K, spec.link_count, r, lambda, method, s.mean,
                                       s.stderr_mean, s.n});
      };

      if (want_pipeline) {
        std::vector<double> vals;
        for (const auto& v : pipeline_n) {
          if (v)
            vals.push_back(double(*v));
          else
            ++result.failures;
        }
        emit("pipeline", vals);
      }
      if (want_oracle) {
        std::vector<double> vals;
        for (const auto& v : oracle_cache) vals.push_back(double(v.value()));
        emit("oracle", vals);
      }
      if (want_baseline) {
        std::vector<double> vals(baseline_n.begin(), baseline_n.end());
        emit("baseline", vals);
      }
    }
  }
  return result;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::string out = "K,links,r,lambda,method,mean_admitted,stderr,n\n";
  for (const SweepRow& row : result.rows) {
    out += std::to_string(row.K) + ',' + std::to_string(row.links) + ',' + std::to_string(row.r) +
           ',' + format_double(row.lambda) + ',' + row.method + ',' +
           format_double(row.mean_admitted) + ',' + format_double(row.stderr_admitted) + ',' +
           std::to_string(row.n) + '\n';
  }
  return out;
}

}  // namespace tim
