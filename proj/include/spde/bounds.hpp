#pragma once

// Analytic moment functionals for the linear and nonlinear equations:
// J_p, M_p, the p-moment upper bound, the exponentially weighted A_{beta,p}
// with its contraction threshold beta*, the boxed spectral integral
// Upsilon_a with the intermittency witness search, the chaos-series second
// moment of the Anderson model, and the exact Lyapunov formulas for the
// Riesz scaling regime.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spde/green.hpp"
#include "spde/kernels.hpp"
#include "spde/levy.hpp"

namespace spde {

struct GridResolution {
  std::size_t points = 2048;  // N for real-space p-norms
  double half_width = 0.0;    // L; 0 selects a t-adapted default
  double freq_cutoff = 0.0;   // radial cutoff; 0 selects certified tails
};

// J_2(t) = int |F G_t|^2 mu(dxi) by radial (or product) quadrature.
double j2_spectral(const OperatorSpec& op, const KernelSpec& kernel, double t,
                   double freq_cutoff = 0.0);

// J_p(t) = |G_t * kappa|_{L^p}^2; Plancherel route at p = 2, spectral
// convolution plus grid p-norm for p > 2.
double j_p_numeric(const OperatorSpec& op, const KernelSpec& kernel, double t, double p,
                   const GridResolution& res = {});

struct JpBound {
  double exponent = 0.0;       // t-exponent of the bound
  double value = 0.0;          // explicit J_p'(t) on the heat-kernel branch
  bool explicit_value = false; // false: value is +infinity, constant unknown
  std::string note;
};
JpBound j_p_bound(const OperatorSpec& op, const KernelSpec& kernel, double t, double p);

struct MpResult {
  double value = 0.0;
  bool diverged = false;
};
// M_p(t) = int_0^t J_p(s)^{p/2} ds with singularity-aware quadrature.
MpResult m_p(const OperatorSpec& op, const KernelSpec& kernel, double t, double p,
             const GridResolution& res = {});

// C_p { M_2(t)^{p/2} + M_p(t) }, the p-th moment bound for the linear solution.
double linear_moment_bound(const OperatorSpec& op, const KernelSpec& kernel,
                           const LevyMeasureSpec& measure, double p, double t, double Bp,
                           const GridResolution& res = {});

struct ABetaResult {
  double value = 0.0;
  double certified_tail_error = 0.0;
};
ABetaResult a_beta_p(const OperatorSpec& op, const KernelSpec& kernel, double beta, double p,
                     const GridResolution& res = {});

struct BetaStarResult {
  double value = 0.0; // 0 = holds everywhere; +inf = no beta in range
  bool at_range_edge = false;
};
BetaStarResult beta_star(const OperatorSpec& op, const KernelSpec& kernel,
                         const LevyMeasureSpec& measure, double p, double lip_sigma,
                         double Bp, double beta_min = 1e-6, double beta_max = 1e6,
                         int bisection_steps = 60, const GridResolution& res = {});

// Upsilon_a(beta) = int_{[a,2a]} (beta + |xi|^2)^{-1} mu(dxi).
double upsilon(const KernelSpec& kernel, const std::array<double, kMaxDim>& a, double beta);

struct IntermittencySearch {
  double a_min = 1e-4;
  double a_max = 64.0;
  int points_per_decade = 8;
  double beta_max = 1e4;
};
struct IntermittencyResult {
  bool intermittent_lb = false;
  std::optional<std::array<double, kMaxDim>> witness_a;
  std::optional<double> witness_beta; // gamma_bar(2) >= witness_beta when found
};
// Searches boxes a on a logarithmic ladder for a witness of the
// second-moment growth condition; inconclusive when none is found.
IntermittencyResult intermittency_check(const OperatorSpec& op, const KernelSpec& kernel,
                                        const LevyMeasureSpec& measure, double lip_lower,
                                        const IntermittencySearch& search = {});

struct ChaosTerm {
  int n = 0;
  double value = 0.0;
  double mc_stderr = 0.0;
};
struct ChaosSeriesResult {
  std::vector<ChaosTerm> terms;
  double partial_sum = 0.0;
  int n_max = 0;
  double eta = 0.0;
  double lambda = 0.0;
  double m2 = 0.0;
  double xi_cut = 0.0;          // frequency truncation (0 = none needed)
  double neglected_mass = 0.0;  // Dalang-weighted mass outside the box
};
// E|u(t,x)|^2 chaos series for the Anderson model, term-by-term Monte Carlo.
ChaosSeriesResult anderson_second_moment(const OperatorSpec& op, const KernelSpec& kernel,
                                         const LevyMeasureSpec& measure, double lambda,
                                         double eta, double t, int n_max,
                                         std::size_t samples, uint64_t seed);

// Closed-form second-order Lyapunov exponent in the Riesz scaling regime;
// rho is the external variational constant.
double lyapunov_exact(OperatorKind kind, int d, double kernel_alpha, double lambda,
                      double m2, double rho);

struct BoundReport {
  std::vector<std::pair<double, double>> j_p_samples; // (t, J_p)
  std::vector<std::pair<double, double>> j_p_bound_values;
  std::pair<double, double> m_p_at{0.0, 0.0};
  double linear_p_bound = 0.0;
  std::vector<std::pair<double, double>> a_beta_samples; // (beta, A)
  double beta_star_value = 0.0;
  std::vector<std::tuple<std::string, double, double>> fitted_exponents;
  double Bp_used = 0.0;
  double Cp_used = 0.0;
};

} // namespace spde
