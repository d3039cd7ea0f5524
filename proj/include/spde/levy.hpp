#pragma once

// Levy measures with finite variance, their absolute moments m_p, and
// samplers for the centered white noise L on space-time grids.

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "spde/grid.hpp"
#include "spde/rng.hpp"

namespace spde {

enum class LevyFamily { Gamma, VarianceGamma, TruncatedStable, CompoundPoisson };

struct JumpAtom {
  double z = 0.0;
  double prob = 0.0;
};

struct LevyMeasureSpec {
  LevyFamily family = LevyFamily::Gamma;

  // Gamma(alpha, beta): nu(dz) = alpha z^{-1} e^{-beta z} 1_{z>0} dz.
  double gamma_alpha = 1.0;
  double gamma_beta = 1.0;

  // Variance gamma with parameters (theta, sigma, nu): difference of two
  // gamma white noises with derived mean/variance rates.
  double vg_theta = 0.0;
  double vg_sigma = 1.0;
  double vg_nu = 1.0;

  // Symmetric alpha-stable measure truncated to |z| <= cutoff; jumps below
  // small_jump_eps are dropped and their variance reported as a bias bound.
  double stable_index = 1.5;
  double cutoff = 1.0;
  double small_jump_eps = 1e-4;

  // Compound Poisson: nu = rate * jump_law, jump_law tabulated.
  double cp_rate = 1.0;
  std::vector<JumpAtom> jump_law;

  static LevyMeasureSpec gamma(double alpha, double beta);
  static LevyMeasureSpec variance_gamma(double theta, double sigma, double nu);
  static LevyMeasureSpec truncated_stable(double index, double cutoff, double eps = 1e-4);
  static LevyMeasureSpec compound_poisson(double rate, std::vector<JumpAtom> law);

  void validate() const;
  std::string name() const;
};

// Derived rates of the two gamma components of a VG noise.
struct VgRates {
  double mu_p, nu_p, mu_n, nu_n;
};
VgRates vg_rates(const LevyMeasureSpec& m);

// m_p = int |z|^p nu(dz); +infinity when the integral diverges.
double moment_mp(const LevyMeasureSpec& measure, double p);

inline double moment_m2(const LevyMeasureSpec& measure) { return moment_mp(measure, 2.0); }

// Variance lost to the small-jump cutoff (TruncatedStable only, else 0).
double small_jump_bias_variance(const LevyMeasureSpec& measure);

struct SeedKey {
  uint64_t seed = 0;
  uint64_t replicate = 0;
};

struct NoiseField {
  SimGrid grid;
  std::vector<double> increments; // one Delta L per space-time cell, step-major
  SeedKey seed_key;
  double m2 = 0.0;
  double bias_variance_bound = 0.0;

  std::size_t n_cells() const { return increments.size(); }
};

// One centered increment per cell of [0,T] x [-L,L]^d. Exact marginal laws
// for Gamma and VG cells; jump enumeration with compensation otherwise.
NoiseField sample_white_noise(const LevyMeasureSpec& measure, const SimGrid& grid,
                              SeedKey key);

// Fills only the spatial slice belonging to time step `step`; used by the
// solvers so a replication never materializes the full noise history.
void sample_noise_step(const LevyMeasureSpec& measure, const SimGrid& grid, SeedKey key,
                       std::size_t step, std::vector<double>& out);

// Riemann approximation sum_cells Phi(cell center) Delta L(cell).
double sample_stochastic_integral(
    const LevyMeasureSpec& measure,
    const std::function<double(double, const std::array<double, kMaxDim>&)>& integrand,
    const SimGrid& grid, SeedKey key);

// C_p { (|Phi|_2^2)^{p/2} + |Phi|_p^p } with C_p = 2^{p-1} B_p^p max(m2^{p/2}, mp).
double rosenthal_bound(double p, double m2, double mp, double Bp, double l2_norm_sq,
                       double lp_norm_p);

double rosenthal_constant(double p, double m2, double mp, double Bp);

// Default B_p used when a config does not pin one.
inline double default_rosenthal_Bp(double p) { return 2.0 * p; }

} // namespace spde
