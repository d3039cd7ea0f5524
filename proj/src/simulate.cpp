#include "spde/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "spde/errors.hpp"

namespace spde {

const std::vector<double>& FieldSeries::at_time(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::fabs(times[i] - t) <= 1e-9 * std::max(1.0, std::fabs(t))) return values[i];
  throw ConfigError("requested time was not recorded");
}

namespace {

struct StepPlan {
  const OperatorSpec* op;
  SimGrid grid;
  std::vector<double> color_mult; // F kappa(xi_m) / dx^d on raw DFT of increments
  std::vector<double> cosv, sincv, rsinv;  // wave rotation entries
  std::vector<double> heat_prop;           // heat propagator over one step
  std::vector<double> drift_prop;          // midpoint Green multiplier
  std::vector<double> drift_cos;           // midpoint cosine for the wave velocity
};

StepPlan make_plan(const OperatorSpec& op, const KernelSpec& kernel, const SimGrid& grid) {
  op.validate();
  kernel.validate();
  grid.validate();
  if (op.dim != grid.dim || kernel.dim != grid.dim)
    throw ConfigError("operator / kernel / grid dimensions must agree");
  if (op.kind == OperatorKind::Wave && op.dim > 2)
    throw UnsupportedError("wave simulation supports d <= 2");
  if (!dalang_condition(kernel).holds)
    throw DalangError("dalang-condition-failed");

  StepPlan plan;
  plan.op = &op;
  plan.grid = grid;
  const std::size_t n = grid.n_space();
  const double dt = grid.time_step;
  std::vector<double> famp = kernel_fourier_grid(kernel, grid);
  plan.color_mult.resize(n);
  const double inv_vol = 1.0 / grid.cell_space_vol();
  for (std::size_t m = 0; m < n; ++m) plan.color_mult[m] = famp[m] * inv_vol;

  if (op.kind == OperatorKind::Heat) {
    plan.heat_prop.resize(n);
    plan.drift_prop.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
      double r2 = grid.frequency_norm2(m);
      plan.heat_prop[m] = std::exp(-0.5 * dt * r2);
      plan.drift_prop[m] = std::exp(-0.25 * dt * r2);
    }
  } else {
    plan.cosv.resize(n);
    plan.sincv.resize(n);
    plan.rsinv.resize(n);
    plan.drift_prop.resize(n);
    plan.drift_cos.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
      double r = std::sqrt(grid.frequency_norm2(m));
      plan.cosv[m] = std::cos(dt * r);
      plan.sincv[m] = green_fourier(op, dt, r);       // sin(dt r)/r, limit dt
      plan.rsinv[m] = r * std::sin(dt * r);
      plan.drift_prop[m] = green_fourier(op, 0.5 * dt, r);
      plan.drift_cos[m] = std::cos(0.5 * dt * r);
    }
  }
  return plan;
}

struct Recorder {
  std::vector<std::size_t> steps; // after which step index to record
  FieldSeries series;

  Recorder(const SimGrid& grid, const SimOptions& opt, ModelKind model, double eta,
           SeedKey key) {
    series.grid = grid;
    series.model = model;
    series.eta = eta;
    series.seed_key = key;
    const std::size_t K = grid.n_steps();
    if (opt.record_times.empty()) {
      for (std::size_t k = 1; k <= K; ++k) steps.push_back(k);
    } else {
      for (double t : opt.record_times) {
        if (t == 0.0) continue;
        double kf = t / grid.time_step;
        auto k = static_cast<std::size_t>(std::llround(kf));
        if (k < 1 || k > K || std::fabs(kf - static_cast<double>(k)) > 1e-9)
          throw ConfigError("record time is not a grid time");
        steps.push_back(k);
      }
      std::sort(steps.begin(), steps.end());
    }
  }

  void record_initial(std::size_t n, double eta) {
    series.times.push_back(0.0);
    series.values.emplace_back(n, eta);
  }

  bool wants(std::size_t k) const {
    return std::binary_search(steps.begin(), steps.end(), k);
  }

  void record(std::size_t k, double dt, std::vector<double> field) {
    series.times.push_back(static_cast<double>(k) * dt);
    series.values.push_back(std::move(field));
  }
};

void check_finite(const std::vector<double>& u, double threshold, std::size_t step) {
  for (double v : u)
    if (!std::isfinite(v) || std::fabs(v) > threshold)
      throw BlowUpError(step, "field exceeded the blow-up threshold");
}

// Shared stepping engine. sigma == nullptr runs the additive linear
// equation (zero initial condition, no eta offset in the noise factor).
FieldSeries run_simulation(const OperatorSpec& op, const KernelSpec& kernel,
                           const LevyMeasureSpec& measure, const ScalarFunc* sigma,
                           const ScalarFunc* drift, double eta, const SimGrid& grid,
                           SeedKey key, const SimOptions& opt, ModelKind model) {
  StepPlan plan = make_plan(op, kernel, grid);
  const std::size_t n = grid.n_space();
  const std::size_t K = grid.n_steps();
  const double dt = grid.time_step;
  const bool is_heat = op.kind == OperatorKind::Heat;
  const bool multiplicative = sigma != nullptr;
  const bool with_drift = drift != nullptr && drift->name != "zero";

  SpectralGrid ws(grid);
  Recorder rec(grid, opt, model, eta, key);
  rec.record_initial(n, multiplicative ? eta : 0.0);

  std::vector<cplx> uhat(n, 0.0);
  std::vector<cplx> what; // wave velocity component
  if (!is_heat) what.assign(n, 0.0);
  if (multiplicative && eta != 0.0)
    uhat[0] = eta * static_cast<double>(n); // raw DFT of the constant field

  std::vector<double> u_real(n, multiplicative ? eta : 0.0);
  std::vector<double> noise(n);
  std::vector<cplx> chat(n);
  std::vector<cplx> work(n);

  for (std::size_t k = 0; k < K; ++k) {
    sample_noise_step(measure, grid, key, k, noise);

    // colored increment in spectral form
    for (std::size_t j = 0; j < n; ++j) chat[j] = noise[j];
    ws.dft(chat);
    for (std::size_t m = 0; m < n; ++m) chat[m] *= plan.color_mult[m];

    if (multiplicative) {
      // bring the colored noise to real space, multiply by sigma(u), go back
      work = chat;
      ws.idft(work);
      for (std::size_t j = 0; j < n; ++j)
        work[j] = sigma->fn(u_real[j]) * work[j].real();
      ws.dft(work);
      chat.swap(work);
    }

    if (is_heat) {
      for (std::size_t m = 0; m < n; ++m)
        uhat[m] = plan.heat_prop[m] * (uhat[m] + chat[m]);
    } else {
      for (std::size_t m = 0; m < n; ++m) {
        cplx tmp = what[m] + chat[m];
        cplx u_new = plan.cosv[m] * uhat[m] + plan.sincv[m] * tmp;
        cplx w_new = -plan.rsinv[m] * uhat[m] + plan.cosv[m] * tmp;
        uhat[m] = u_new;
        what[m] = w_new;
      }
    }

    if (with_drift) {
      for (std::size_t j = 0; j < n; ++j) work[j] = drift->fn(u_real[j]);
      ws.dft(work);
      if (is_heat) {
        for (std::size_t m = 0; m < n; ++m)
          uhat[m] += dt * plan.drift_prop[m] * work[m];
      } else {
        for (std::size_t m = 0; m < n; ++m) {
          uhat[m] += dt * plan.drift_prop[m] * work[m];
          what[m] += dt * plan.drift_cos[m] * work[m];
        }
      }
    }

    const bool need_real = multiplicative || with_drift || rec.wants(k + 1) || k + 1 == K;
    if (need_real) {
      work = uhat;
      ws.idft(work);
      for (std::size_t j = 0; j < n; ++j) u_real[j] = work[j].real();
      check_finite(u_real, opt.blowup_threshold, k + 1);
      if (rec.wants(k + 1)) rec.record(k + 1, dt, u_real);
    }
  }
  return std::move(rec.series);
}

} // namespace

FieldSeries simulate_linear(const OperatorSpec& op, const KernelSpec& kernel,
                            const LevyMeasureSpec& measure, const SimGrid& grid,
                            SeedKey key, const SimOptions& opt) {
  return run_simulation(op, kernel, measure, nullptr, nullptr, 0.0, grid, key, opt,
                        ModelKind::Linear);
}

FieldSeries simulate_nonlinear(const OperatorSpec& op, const KernelSpec& kernel,
                               const LevyMeasureSpec& measure, const ScalarFunc& sigma,
                               const ScalarFunc& drift, double eta, const SimGrid& grid,
                               SeedKey key, const SimOptions& opt) {
  return run_simulation(op, kernel, measure, &sigma, &drift, eta, grid, key, opt,
                        ModelKind::Nonlinear);
}

FieldSeries simulate_anderson(const OperatorSpec& op, const KernelSpec& kernel,
                              const LevyMeasureSpec& measure, double lambda, double eta,
                              const SimGrid& grid, SeedKey key, const SimOptions& opt) {
  ScalarFunc sig = ScalarFunc::scaled_linear(lambda);
  ScalarFunc b = ScalarFunc::zero();
  return run_simulation(op, kernel, measure, &sig, &b, eta, grid, key, opt,
                        ModelKind::Anderson);
}

namespace {

// One Picard sweep: propagate with sigma evaluated on the frozen previous
// iterate; returns the new iterate on the full (step, space) lattice.
std::vector<std::vector<double>> picard_sweep(const StepPlan& plan,
                                              const LevyMeasureSpec& measure,
                                              const ScalarFunc& sigma,
                                              const ScalarFunc& drift, double eta,
                                              SeedKey key,
                                              const std::vector<std::vector<double>>& prev) {
  const OperatorSpec& op = *plan.op;
  const SimGrid& grid = plan.grid;
  const std::size_t n = grid.n_space();
  const std::size_t K = grid.n_steps();
  const double dt = grid.time_step;
  const bool is_heat = op.kind == OperatorKind::Heat;
  const bool with_drift = drift.name != "zero";

  SpectralGrid ws(grid);
  std::vector<std::vector<double>> next(K + 1, std::vector<double>(n, eta));
  std::vector<cplx> uhat(n, 0.0), what, chat(n), work(n);
  if (!is_heat) what.assign(n, 0.0);
  std::vector<double> noise(n);

  for (std::size_t k = 0; k < K; ++k) {
    sample_noise_step(measure, grid, key, k, noise);
    for (std::size_t j = 0; j < n; ++j) chat[j] = noise[j];
    ws.dft(chat);
    for (std::size_t m = 0; m < n; ++m) chat[m] *= plan.color_mult[m];
    work = chat;
    ws.idft(work);
    for (std::size_t j = 0; j < n; ++j) work[j] = sigma.fn(prev[k][j]) * work[j].real();
    ws.dft(work);
    chat.swap(work);

    if (is_heat) {
      for (std::size_t m = 0; m < n; ++m)
        uhat[m] = plan.heat_prop[m] * (uhat[m] + chat[m]);
    } else {
      for (std::size_t m = 0; m < n; ++m) {
        cplx tmp = what[m] + chat[m];
        cplx u_new = plan.cosv[m] * uhat[m] + plan.sincv[m] * tmp;
        cplx w_new = -plan.rsinv[m] * uhat[m] + plan.cosv[m] * tmp;
        uhat[m] = u_new;
        what[m] = w_new;
      }
    }
    if (with_drift) {
      for (std::size_t j = 0; j < n; ++j) work[j] = drift.fn(prev[k][j]);
      ws.dft(work);
      for (std::size_t m = 0; m < n; ++m) uhat[m] += dt * plan.drift_prop[m] * work[m];
      if (!is_heat)
        for (std::size_t m = 0; m < n; ++m) what[m] += dt * plan.drift_cos[m] * work[m];
    }
    work = uhat;
    ws.idft(work);
    for (std::size_t j = 0; j < n; ++j) next[k + 1][j] = eta + work[j].real();
    check_finite(next[k + 1], 1e12, k + 1);
  }
  return next;
}

} // namespace

std::vector<double> picard_validate(const OperatorSpec& op, const KernelSpec& kernel,
                                    const LevyMeasureSpec& measure, const ScalarFunc& sigma,
                                    const ScalarFunc& drift, double eta, const SimGrid& grid,
                                    SeedKey key, int iterations, int replicates) {
  StepPlan plan = make_plan(op, kernel, grid);
  const std::size_t K = grid.n_steps();
  const std::size_t n = grid.n_space();
  std::vector<double> sup_gaps(iterations, 0.0);

  // accumulate mean squared gaps over replicates, then take the grid sup
  std::vector<std::vector<double>> acc(iterations,
                                       std::vector<double>((K + 1) * n, 0.0));
  for (int r = 0; r < replicates; ++r) {
    SeedKey rk{key.seed, key.replicate + static_cast<uint64_t>(r)};
    std::vector<std::vector<double>> prev(K + 1, std::vector<double>(n, eta));
    for (int it = 0; it < iterations; ++it) {
      auto next = picard_sweep(plan, measure, sigma, drift, eta, rk, prev);
      for (std::size_t k = 0; k <= K; ++k)
        for (std::size_t j = 0; j < n; ++j) {
          double g = next[k][j] - prev[k][j];
          acc[it][k * n + j] += g * g;
        }
      prev.swap(next);
    }
  }
  for (int it = 0; it < iterations; ++it) {
    double sup = 0.0;
    for (double v : acc[it]) sup = std::max(sup, v / replicates);
    sup_gaps[it] = sup;
  }
  return sup_gaps;
}

std::vector<std::vector<double>> picard_final_iterate(
    const OperatorSpec& op, const KernelSpec& kernel, const LevyMeasureSpec& measure,
    const ScalarFunc& sigma, const ScalarFunc& drift, double eta, const SimGrid& grid,
    SeedKey key, int iterations) {
  StepPlan plan = make_plan(op, kernel, grid);
  const std::size_t K = grid.n_steps();
  const std::size_t n = grid.n_space();
  std::vector<std::vector<double>> prev(K + 1, std::vector<double>(n, eta));
  for (int it = 0; it < iterations; ++it)
    prev = picard_sweep(plan, measure, sigma, drift, eta, key, prev);
  return prev;
}

} // namespace spde
