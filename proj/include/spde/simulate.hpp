#pragma once

// Mild-solution simulation on the periodic grid. One step propagates the
// spectral state with the exact Green multiplier and injects the colored
// noise of the step:
//   heat:  u^(k+1) = FG_dt ( u^(k) + C^(k) ),
//   wave:  (u, du/dt) rotated by [cos, sin/|xi|; -|xi| sin, cos],
// where C^(k) is sigma(u_k) times the kappa-colored white-noise increment.

#include <functional>
#include <string>
#include <vector>

#include "spde/green.hpp"
#include "spde/kernels.hpp"
#include "spde/levy.hpp"

namespace spde {

enum class ModelKind { Linear, Nonlinear, Anderson };

struct ScalarFunc {
  std::function<double(double)> fn;
  double lipschitz = 0.0; // attested by the caller, used for reporting
  std::string name = "custom";

  static ScalarFunc zero() { return {[](double) { return 0.0; }, 0.0, "zero"}; }
  static ScalarFunc one() { return {[](double) { return 1.0; }, 0.0, "one"}; }
  static ScalarFunc scaled_linear(double lam) {
    return {[lam](double u) { return lam * u; }, std::fabs(lam), "scaled-linear"};
  }
};

struct FieldSeries {
  SimGrid grid;
  std::vector<double> times;               // recorded times, ascending, t=0 first
  std::vector<std::vector<double>> values; // one spatial field per recorded time
  ModelKind model = ModelKind::Linear;
  double eta = 0.0;
  SeedKey seed_key;

  const std::vector<double>& at_time(double t) const;
};

struct SimOptions {
  std::vector<double> record_times; // empty: record every step
  double blowup_threshold = 1e12;
};

FieldSeries simulate_linear(const OperatorSpec& op, const KernelSpec& kernel,
                            const LevyMeasureSpec& measure, const SimGrid& grid,
                            SeedKey key, const SimOptions& opt = {});

FieldSeries simulate_nonlinear(const OperatorSpec& op, const KernelSpec& kernel,
                               const LevyMeasureSpec& measure, const ScalarFunc& sigma,
                               const ScalarFunc& drift, double eta, const SimGrid& grid,
                               SeedKey key, const SimOptions& opt = {});

FieldSeries simulate_anderson(const OperatorSpec& op, const KernelSpec& kernel,
                              const LevyMeasureSpec& measure, double lambda, double eta,
                              const SimGrid& grid, SeedKey key, const SimOptions& opt = {});

// Picard iteration against one frozen noise realization per replicate;
// returns sup over the grid of the replicate-averaged squared gap per sweep.
std::vector<double> picard_validate(const OperatorSpec& op, const KernelSpec& kernel,
                                    const LevyMeasureSpec& measure, const ScalarFunc& sigma,
                                    const ScalarFunc& drift, double eta, const SimGrid& grid,
                                    SeedKey key, int iterations, int replicates = 8);

// Final Picard iterate for one replicate (test hook for self-consistency).
std::vector<std::vector<double>> picard_final_iterate(
    const OperatorSpec& op, const KernelSpec& kernel, const LevyMeasureSpec& measure,
    const ScalarFunc& sigma, const ScalarFunc& drift, double eta, const SimGrid& grid,
    SeedKey key, int iterations);

} // namespace spde
