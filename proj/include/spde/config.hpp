#pragma once

// Experiment configuration: a single versioned JSON document validated at
// load time, with cross-field constraints checked eagerly.

#include <optional>
#include <string>
#include <vector>

#include "spde/estimate.hpp"

#include <json.hpp>

namespace spde {

struct AnalysisConfig {
  std::vector<double> p_list{2.0};
  std::vector<double> times;
  std::size_t replicates = 200;
  int n_max = 4;
  std::size_t chaos_samples = 100000;
  std::vector<double> beta_grid;
  double Bp = 0.0; // 0: default 2p per moment order
  IntermittencySearch intermittency;
  std::optional<std::pair<double, double>> lyapunov_window;
  double lip_lower = 0.0; // 0: model-derived (anderson lambda)
  double rho = 0.0;       // external variational constant for lyapunov_exact
};

struct ExperimentConfig {
  OperatorSpec op;
  KernelSpec kernel;
  LevyMeasureSpec measure;
  ModelKind model = ModelKind::Linear;
  std::string sigma_name = "identity";
  double sigma_scale = 1.0;
  std::string drift_name = "zero";
  double drift_scale = 0.0;
  double lambda = 1.0;
  double eta = 1.0;
  SimGrid grid;
  AnalysisConfig analysis;
  uint64_t seed = 0;
  std::string output_dir = "out";

  static ExperimentConfig from_json(const nlohmann::json& j, bool allow_no_dalang);
  static ExperimentConfig load(const std::string& path, bool allow_no_dalang);
  nlohmann::json to_json() const;

  SimConfig to_sim_config() const;
  ScalarFunc make_sigma() const;
  ScalarFunc make_drift() const;
  double rosenthal_Bp(double p) const;
};

// Named scalar functions with certifiable Lipschitz constants.
ScalarFunc named_scalar_func(const std::string& name, double scale);

} // namespace spde
