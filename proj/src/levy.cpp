#include "spde/levy.hpp"

#include <algorithm>
#include <cmath>

#include "spde/errors.hpp"

namespace spde {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

LevyMeasureSpec LevyMeasureSpec::gamma(double alpha, double beta) {
  LevyMeasureSpec m;
  m.family = LevyFamily::Gamma;
  m.gamma_alpha = alpha;
  m.gamma_beta = beta;
  m.validate();
  return m;
}

LevyMeasureSpec LevyMeasureSpec::variance_gamma(double theta, double sigma, double nu) {
  LevyMeasureSpec m;
  m.family = LevyFamily::VarianceGamma;
  m.vg_theta = theta;
  m.vg_sigma = sigma;
  m.vg_nu = nu;
  m.validate();
  return m;
}

LevyMeasureSpec LevyMeasureSpec::truncated_stable(double index, double cutoff, double eps) {
  LevyMeasureSpec m;
  m.family = LevyFamily::TruncatedStable;
  m.stable_index = index;
  m.cutoff = cutoff;
  m.small_jump_eps = eps;
  m.validate();
  return m;
}

LevyMeasureSpec LevyMeasureSpec::compound_poisson(double rate, std::vector<JumpAtom> law) {
  LevyMeasureSpec m;
  m.family = LevyFamily::CompoundPoisson;
  m.cp_rate = rate;
  m.jump_law = std::move(law);
  m.validate();
  return m;
}

void LevyMeasureSpec::validate() const {
  switch (family) {
    case LevyFamily::Gamma:
      if (!(gamma_alpha > 0.0) || !(gamma_beta > 0.0))
        throw ConfigError("gamma measure needs alpha > 0 and beta > 0");
      break;
    case LevyFamily::VarianceGamma:
      if (!(vg_sigma > 0.0) || !(vg_nu > 0.0))
        throw ConfigError("variance gamma needs sigma > 0 and nu > 0");
      break;
    case LevyFamily::TruncatedStable:
      if (!(stable_index > 0.0) || !(stable_index < 2.0))
        throw ConfigError("stable index must lie in (0,2)");
      if (!(cutoff > 0.0)) throw ConfigError("stable cutoff must be positive");
      if (!(small_jump_eps > 0.0) || !(small_jump_eps < cutoff))
        throw ConfigError("small-jump cutoff must lie in (0, cutoff)");
      break;
    case LevyFamily::CompoundPoisson: {
      if (!(cp_rate > 0.0)) throw ConfigError("compound Poisson rate must be positive");
      if (jump_law.empty()) throw ConfigError("compound Poisson needs a tabulated jump law");
      double total = 0.0, var = 0.0;
      for (const auto& a : jump_law) {
        if (!(a.prob >= 0.0)) throw ConfigError("jump probabilities must be nonnegative");
        total += a.prob;
        var += a.prob * a.z * a.z;
      }
      if (std::fabs(total - 1.0) > 1e-9)
        throw ConfigError("jump law probabilities must sum to 1");
      if (!(var > 0.0)) throw ConfigError("jump law must carry nonzero variance");
      break;
    }
  }
  double m2 = moment_mp(*this, 2.0);
  if (!(m2 > 0.0) || !std::isfinite(m2))
    throw MomentGateError("finite-variance gate: m2 must be finite and positive");
}

std::string LevyMeasureSpec::name() const {
  switch (family) {
    case LevyFamily::Gamma: return "gamma";
    case LevyFamily::VarianceGamma: return "variance-gamma";
    case LevyFamily::TruncatedStable: return "truncated-stable";
    case LevyFamily::CompoundPoisson: return "compound-poisson";
  }
  return "?";
}

VgRates vg_rates(const LevyMeasureSpec& m) {
  double root = 0.5 * std::sqrt(m.vg_theta * m.vg_theta + 2.0 * m.vg_sigma * m.vg_sigma / m.vg_nu);
  VgRates r;
  r.mu_p = root + 0.5 * m.vg_theta;
  r.mu_n = root - 0.5 * m.vg_theta;
  r.nu_p = r.mu_p * r.mu_p * m.vg_nu;
  r.nu_n = r.mu_n * r.mu_n * m.vg_nu;
  return r;
}

double moment_mp(const LevyMeasureSpec& measure, double p) {
  if (!(p >= 0.0)) throw ConfigError("moment order p must be nonnegative");
  switch (measure.family) {
    case LevyFamily::Gamma:
      if (p == 0.0) return kInf; // total mass of the gamma Levy measure diverges
      return measure.gamma_alpha * std::tgamma(p) / std::pow(measure.gamma_beta, p);
    case LevyFamily::VarianceGamma: {
      if (p == 0.0) return kInf;
      VgRates r = vg_rates(measure);
      // Each component is a gamma measure with unit-shape rate 1/nu and
      // scale mu nu, so m_p = Gamma(p) nu^{p-1} (mu_p^p + mu_n^p).
      return std::tgamma(p) * std::pow(measure.vg_nu, p - 1.0) *
             (std::pow(r.mu_p, p) + std::pow(r.mu_n, p));
    }
    case LevyFamily::TruncatedStable: {
      double a = measure.stable_index, c = measure.cutoff;
      if (p <= a) return kInf;
      return a * std::pow(c, p - a) / (p - a);
    }
    case LevyFamily::CompoundPoisson: {
      double s = 0.0;
      for (const auto& atom : measure.jump_law)
        s += atom.prob * std::pow(std::fabs(atom.z), p);
      return measure.cp_rate * s;
    }
  }
  return kInf;
}

double small_jump_bias_variance(const LevyMeasureSpec& measure) {
  if (measure.family != LevyFamily::TruncatedStable) return 0.0;
  double a = measure.stable_index, eps = measure.small_jump_eps;
  return a * std::pow(eps, 2.0 - a) / (2.0 - a);
}

namespace {

double sample_cell_increment(const LevyMeasureSpec& m, double vol, RngStream& rng) {
  switch (m.family) {
    case LevyFamily::Gamma: {
      double g = rng.gamma(m.gamma_alpha * vol, m.gamma_beta);
      return g - m.gamma_alpha * vol / m.gamma_beta;
    }
    case LevyFamily::VarianceGamma: {
      VgRates r = vg_rates(m);
      double shape = vol / m.vg_nu;
      double gp = rng.gamma(shape, 1.0 / (r.mu_p * m.vg_nu));
      double gn = rng.gamma(shape, 1.0 / (r.mu_n * m.vg_nu));
      return gp - gn - m.vg_theta * vol;
    }
    case LevyFamily::TruncatedStable: {
      double a = m.stable_index;
      double lo = std::pow(m.small_jump_eps, -a), hi = std::pow(m.cutoff, -a);
      double intensity = lo - hi; // nu({eps < |z| <= cutoff})
      uint64_t njump = rng.poisson(intensity * vol);
      double sum = 0.0;
      for (uint64_t j = 0; j < njump; ++j) {
        double u = rng.uniform();
        double mag = std::pow(lo - u * intensity, -1.0 / a);
        sum += rng.uniform() < 0.5 ? mag : -mag;
      }
      return sum; // symmetric measure: compensator vanishes
    }
    case LevyFamily::CompoundPoisson: {
      uint64_t njump = rng.poisson(m.cp_rate * vol);
      double sum = 0.0;
      for (uint64_t j = 0; j < njump; ++j) {
        double u = rng.uniform(), acc = 0.0;
        double z = m.jump_law.back().z;
        for (const auto& atom : m.jump_law) {
          acc += atom.prob;
          if (u <= acc) {
            z = atom.z;
            break;
          }
        }
        sum += z;
      }
      double mean_jump = 0.0;
      for (const auto& atom : m.jump_law) mean_jump += atom.prob * atom.z;
      return sum - vol * m.cp_rate * mean_jump;
    }
  }
  return 0.0;
}

} // namespace

void sample_noise_step(const LevyMeasureSpec& measure, const SimGrid& grid, SeedKey key,
                       std::size_t step, std::vector<double>& out) {
  double m2 = moment_m2(measure);
  if (!std::isfinite(m2))
    throw MomentGateError("finite-variance gate: m2 is infinite");
  const std::size_t ns = grid.n_space();
  out.resize(ns);
  const double vol = grid.cell_vol();
  for (std::size_t j = 0; j < ns; ++j) {
    RngStream rng(key.seed, key.replicate, step, j);
    out[j] = sample_cell_increment(measure, vol, rng);
  }
}

NoiseField sample_white_noise(const LevyMeasureSpec& measure, const SimGrid& grid,
                              SeedKey key) {
  grid.validate();
  NoiseField nf;
  nf.grid = grid;
  nf.seed_key = key;
  nf.m2 = moment_m2(measure);
  nf.bias_variance_bound = small_jump_bias_variance(measure);
  const std::size_t steps = grid.n_steps(), ns = grid.n_space();
  nf.increments.resize(steps * ns);
  std::vector<double> slice;
  for (std::size_t k = 0; k < steps; ++k) {
    sample_noise_step(measure, grid, key, k, slice);
    std::copy(slice.begin(), slice.end(), nf.increments.begin() + k * ns);
  }
  return nf;
}

double sample_stochastic_integral(
    const LevyMeasureSpec& measure,
    const std::function<double(double, const std::array<double, kMaxDim>&)>& integrand,
    const SimGrid& grid, SeedKey key) {
  grid.validate();
  double m2 = moment_m2(measure);
  if (!std::isfinite(m2)) throw MomentGateError("finite-variance gate: m2 is infinite");
  const std::size_t steps = grid.n_steps(), ns = grid.n_space();
  const double vol = grid.cell_vol();
  double sum = 0.0, comp = 0.0; // Kahan accumulation in cell order
  std::array<double, kMaxDim> x{};
  for (std::size_t k = 0; k < steps; ++k) {
    double t_mid = (static_cast<double>(k) + 0.5) * grid.time_step;
    for (std::size_t j = 0; j < ns; ++j) {
      grid.node_coord(j, x);
      double phi = integrand(t_mid, x);
      if (phi == 0.0) continue;
      RngStream rng(key.seed, key.replicate, k, j);
      double term = phi * sample_cell_increment(measure, vol, rng);
      double y = term - comp;
      double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
  }
  return sum;
}

double rosenthal_constant(double p, double m2, double mp, double Bp) {
  if (!(p >= 2.0)) throw ConfigError("rosenthal bound needs p >= 2");
  if (!std::isfinite(mp))
    throw MomentGateError("moment gate: m_p is infinite, p-th moment does not exist");
  return std::pow(2.0, p - 1.0) * std::pow(Bp, p) * std::max(std::pow(m2, p / 2.0), mp);
}

double rosenthal_bound(double p, double m2, double mp, double Bp, double l2_norm_sq,
                       double lp_norm_p) {
  double cp = rosenthal_constant(p, m2, mp, Bp);
  return cp * (std::pow(l2_norm_sq, p / 2.0) + lp_norm_p);
}

} // namespace spde
