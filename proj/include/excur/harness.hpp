#pragma once

#include "excur/covariance.hpp"
#include "excur/grid.hpp"
#include "excur/perturbation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace excur {

enum class ExperimentKind { CurvatureSweep, Histogram, Inference, Clt };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::CurvatureSweep;
  CovarianceModel model;
  GridSpec grid{1024, 1024, 1.0};
  PerturbationSpec pspec;
  std::vector<double> levels;
  std::vector<double> epsilons;  // inference: one study per epsilon
  int replicas = 100;
  std::uint64_t master_seed = 1;
  std::string out_dir = ".";
  int threads = 0;  // 0: hardware concurrency
  int theta_draws = 100000;
  double clip_tol = 1e-6;
  double ci_level = 0.95;
  // clt schedule: per-scale grid sizes with matched epsilons
  std::vector<std::int64_t> clt_sizes;
  std::vector<double> clt_epsilons;
  // density-curve window (limit-density subcommand)
  double y_half_range = 15.0;
  int y_points = 301;

  void validate() const;
  nlohmann::json echo() const;
};

// parses .json, or a flat TOML subset ([section], key = value, arrays);
// dispatches on file extension
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json(const nlohmann::json& j);

struct ExperimentResult {
  std::vector<std::string> csv_paths;
  std::string manifest_path;
  nlohmann::json summary;  // experiment-specific results, echoed in manifest
};

ExperimentResult run_curvature_sweep(const ExperimentConfig& cfg);
ExperimentResult run_histogram_experiment(const ExperimentConfig& cfg);
ExperimentResult run_inference_experiment(const ExperimentConfig& cfg);
ExperimentResult run_clt_experiment(const ExperimentConfig& cfg);

// dynamic scheduling over [0, n); exceptions propagate to the caller
void parallel_for(std::int64_t n, int threads,
                  const std::function<void(std::int64_t)>& body);

int resolve_threads(int requested);

}  // namespace excur
