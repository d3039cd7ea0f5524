#pragma once

// Monte Carlo moment estimation over replicated simulations, finite-horizon
// growth-rate (Lyapunov) regression, and the bound comparison harness.

#include <cstdint>
#include <string>
#include <vector>

#include "spde/bounds.hpp"
#include "spde/simulate.hpp"

namespace spde {

struct SimConfig {
  OperatorSpec op;
  KernelSpec kernel;
  LevyMeasureSpec measure;
  ModelKind model = ModelKind::Linear;
  ScalarFunc sigma = ScalarFunc::one();
  ScalarFunc drift = ScalarFunc::zero();
  double lambda = 1.0; // anderson coupling
  double eta = 1.0;
  SimGrid grid;

  FieldSeries run_replicate(SeedKey key, const SimOptions& opt) const;
};

struct MomentReport {
  std::vector<double> times;
  std::vector<double> p_values;
  // row-major [p index][time index]
  std::vector<std::vector<double>> estimates;
  std::vector<std::vector<double>> stderrs;
  std::vector<std::vector<double>> ess;
  std::vector<std::vector<bool>> ess_ok; // false: flagged, ESS < 30
  std::size_t replicates = 0;
  std::size_t aborted = 0;
  bool abort_flag = false; // more than 1% of replications aborted
  std::size_t probe_stride = 4;
  std::size_t probe_offset = 0;
};

MomentReport mc_moments(const SimConfig& sim, const std::vector<double>& p_list,
                        const std::vector<double>& times, std::size_t replicates,
                        uint64_t seed, unsigned threads = 1, std::size_t probe_stride = 4,
                        std::size_t probe_offset = 0, double blowup_threshold = 1e12);

struct LyapunovEstimate {
  double slope = 0.0;  // finite-horizon growth rate of log E|u|^p
  double stderr_ = 0.0;
};
LyapunovEstimate lyapunov_estimate(const MomentReport& report, double p, double t_lo,
                                   double t_hi);

struct BoundVerdict {
  double t = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  double bound = 0.0;
  bool pass = false;
};
struct CompareResult {
  std::vector<BoundVerdict> verdicts;
  bool all_pass = false;
};
// One-sided check: estimate <= bound + 3 stderr, per time point.
CompareResult compare_bound(const MomentReport& report, double p,
                            const std::vector<std::pair<double, double>>& bound_series);

} // namespace spde
