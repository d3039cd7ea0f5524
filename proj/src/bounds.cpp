#include "spde/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "spde/errors.hpp"
#include "spde/quad.hpp"
#include "spde/rng.hpp"
#include "spde/stats.hpp"

namespace spde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double surface_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d); }

// bound for int_R^inf r^q e^{-c r^2} dr
double gaussian_tail(double q, double c, double R) {
  if (q > -1.0)
    return std::exp(-0.5 * c * R * R) * 0.5 * std::tgamma(0.5 * (q + 1.0)) *
           std::pow(2.0 / c, 0.5 * (q + 1.0));
  return std::pow(R, q) * std::exp(-c * R * R) / (2.0 * c * R);
}

// bound for int_R^inf r^q e^{-c r} dr
double exp_tail(double q, double c, double R) {
  if (q > -1.0)
    return std::exp(-0.5 * c * R) * std::tgamma(q + 1.0) * std::pow(2.0 / c, q + 1.0);
  return std::pow(R, q) * std::exp(-c * R) / c;
}

// int_R^inf r^q dr; +inf when the power does not integrate
double power_tail(double q, double R) {
  if (q < -1.0) return std::pow(R, q + 1.0) / (-1.0 - q);
  return kInf;
}

// Certified bound for the tail of r^{d-1} w(r) fk2(r) beyond R, where w is
// the squared Green transform at time t.
double spectral_tail_bound(const OperatorSpec& op, const KernelSpec& k, double t, double R) {
  const int d = op.dim;
  if (op.kind == OperatorKind::Heat) {
    switch (k.family) {
      case KernelFamily::Heat: return gaussian_tail(d - 1.0, t + 0.5 * k.alpha, R);
      case KernelFamily::PoissonK: return gaussian_tail(d - 1.0, t, R);
      case KernelFamily::Riesz:
      case KernelFamily::Bessel: return gaussian_tail(d - 1.0 - k.alpha, t, R);
      case KernelFamily::Product: return kInf;
    }
  } else {
    // |F G_t|^2 <= 1/r^2
    switch (k.family) {
      case KernelFamily::Heat: return gaussian_tail(d - 3.0, 0.5 * k.alpha, R);
      case KernelFamily::PoissonK: return exp_tail(d - 3.0, k.alpha, R);
      case KernelFamily::Riesz:
      case KernelFamily::Bessel: return power_tail(d - 3.0 - k.alpha, R);
      case KernelFamily::Product: return kInf;
    }
  }
  return kInf;
}

// (2 pi)^-d int |F G_t(xi)|^2 weight(xi) mu(dxi)-style radial integral for
// isotropic kernels; cutoff > 0 truncates instead of certifying the tail.
double radial_green_sq_integral(const OperatorSpec& op, const KernelSpec& k, double t,
                                double cutoff) {
  const int d = op.dim;
  auto integrand = [&](double r) {
    double g = green_fourier(op, t, r);
    return std::pow(r, d - 1.0) * g * g * kernel_fourier_sq_radial(k, r);
  };
  double split = cutoff > 0.0 ? std::min(1.0, cutoff) : 1.0;
  double core = integrate_graded0(integrand, split, 1e-11);
  double tail;
  if (cutoff > 0.0) {
    tail = cutoff > split ? integrate(integrand, split, cutoff, 1e-11) : 0.0;
  } else {
    if (!std::isfinite(spectral_tail_bound(op, k, t, 8.0)))
      throw DalangError("spectral integral has a non-integrable tail (Dalang fails)");
    tail = integrate_tail(integrand, 1.0,
                          [&](double R) { return spectral_tail_bound(op, k, t, R); }, 1e-11);
  }
  return std::pow(kTwoPi, -d) * surface_area(d) * (core + tail);
}

// Graded tensor quadrature of |F G_t|^2 fk2 over expanding boxes, for
// product kernels where the spectrum is not radial.
double product_green_sq_integral(const OperatorSpec& op, const KernelSpec& k, double t,
                                 double cutoff) {
  const int d = op.dim;
  double R_end = cutoff > 0.0 ? cutoff : 0.0;
  if (R_end == 0.0) {
    if (!dalang_condition(k).holds)
      throw DalangError("spectral integral has a non-integrable tail (Dalang fails)");
    R_end = 4096.0;
    if (op.kind == OperatorKind::Heat) R_end = std::max(8.0, std::sqrt(90.0 / t));
  }
  std::vector<double> segs{0.0};
  int levels = 30;
  for (int j = levels; j >= 0; --j) segs.push_back(R_end / std::pow(2.0, j));
  const int nseg = static_cast<int>(segs.size()) - 1;
  std::vector<int> cursor(d, 0);
  double total = 0.0;
  for (;;) {
    double lo[3], hi[3];
    for (int a = 0; a < d; ++a) {
      lo[a] = segs[cursor[a]];
      hi[a] = segs[cursor[a] + 1];
    }
    auto f = [&](const double* p) {
      std::array<double, kMaxDim> xi{{0, 0, 0}};
      double n2 = 0.0;
      for (int a = 0; a < d; ++a) {
        xi[a] = p[a];
        n2 += p[a] * p[a];
      }
      double g = green_fourier(op, t, std::sqrt(n2));
      return g * g * kernel_fourier_sq(k, xi);
    };
    total += integrate_box(f, d, lo, hi, 10);
    int a = d - 1;
    while (a >= 0 && ++cursor[a] == nseg) {
      cursor[a] = 0;
      --a;
    }
    if (a < 0) break;
  }
  return std::pow(2.0, d) * std::pow(kTwoPi, -d) * total;
}

double kernel_length_scale(const KernelSpec& k) {
  switch (k.family) {
    case KernelFamily::Heat: return std::sqrt(k.alpha);
    case KernelFamily::Bessel: return 1.0 + 0.5 * k.alpha;
    case KernelFamily::PoissonK: return 0.5 * k.alpha;
    case KernelFamily::Riesz: return 0.0;
    case KernelFamily::Product: {
      double s = 0.0;
      for (const auto& f : k.factors) s = std::max(s, kernel_length_scale(f));
      return s;
    }
  }
  return 1.0;
}

bool has_riesz_factor(const KernelSpec& k) {
  if (k.family == KernelFamily::Riesz) return true;
  if (k.family == KernelFamily::Product)
    for (const auto& f : k.factors)
      if (f.family == KernelFamily::Riesz) return true;
  return false;
}

SimGrid default_norm_grid(const OperatorSpec& op, const KernelSpec& k, double t,
                          const GridResolution& res) {
  double scale_g = op.kind == OperatorKind::Heat ? std::sqrt(t) : t;
  double L = res.half_width;
  if (L <= 0.0) {
    L = 8.0 * (scale_g + kernel_length_scale(k));
    if (has_riesz_factor(k)) L = std::max(L, 48.0 * std::max(scale_g, 1e-3));
  }
  SimGrid g;
  g.dim = op.dim;
  g.half_width = L;
  g.points = res.points;
  g.time_step = 1.0;
  g.horizon = 1.0;
  return g;
}

} // namespace

double j2_spectral(const OperatorSpec& op, const KernelSpec& kernel, double t,
                   double freq_cutoff) {
  op.validate();
  kernel.validate();
  if (kernel.dim != op.dim) throw ConfigError("kernel / operator dimension mismatch");
  if (kernel.isotropic()) return radial_green_sq_integral(op, kernel, t, freq_cutoff);
  return product_green_sq_integral(op, kernel, t, freq_cutoff);
}

double j_p_numeric(const OperatorSpec& op, const KernelSpec& kernel, double t, double p,
                   const GridResolution& res) {
  if (!(p >= 2.0)) throw ConfigError("j_p_numeric needs p >= 2");
  if (!(t > 0.0)) throw ConfigError("j_p_numeric needs t > 0");
  if (p == 2.0) return j2_spectral(op, kernel, t, res.freq_cutoff);
  if (op.kind == OperatorKind::Wave && op.dim > 2)
    throw UnsupportedError("wave d>=3 has no pointwise Green function for p > 2");
  if (res.freq_cutoff == 0.0 && !dalang_condition(kernel).holds)
    throw DalangError("j_p_numeric requires Dalang's condition (or an explicit cutoff)");

  SimGrid g = default_norm_grid(op, kernel, t, res);
  SpectralGrid ws(g);
  std::vector<double> famp = kernel_fourier_grid(kernel, g);
  std::vector<cplx> spec(g.n_space());
  for (std::size_t m = 0; m < spec.size(); ++m) {
    double r = std::sqrt(g.frequency_norm2(m));
    spec[m] = green_fourier(op, t, r) * famp[m];
  }
  std::vector<double> w = ws.to_field(std::move(spec));
  double sum = 0.0;
  for (double v : w) sum += std::pow(std::fabs(v), p);
  sum *= g.cell_space_vol();
  return std::pow(sum, 2.0 / p);
}

JpBound j_p_bound(const OperatorSpec& op, const KernelSpec& kernel, double t, double p) {
  if (!(p >= 2.0)) throw ConfigError("j_p_bound needs p >= 2");
  op.validate();
  kernel.validate();
  const int d = op.dim;
  JpBound out;
  switch (kernel.family) {
    case KernelFamily::Heat: {
      // kappa^{p/2} * kappa~^{p/2} stays in the gaussian family, with
      // mu_p(dxi) = D (2 pi)^-d exp(-alpha |xi|^2 / 2) dxi and
      // D = 2^{d/2} p^{-d/p} (pi alpha)^{d (1/p - 1/2)}.
      double a = kernel.alpha;
      double D = std::pow(2.0, 0.5 * d) * std::pow(p, -static_cast<double>(d) / p) *
                 std::pow(kPi * a, d * (1.0 / p - 0.5));
      out.explicit_value = true;
      if (op.kind == OperatorKind::Heat) {
        out.exponent = 0.0;
        out.value = D * std::pow(kTwoPi, -d) * std::pow(kPi / (t + 0.5 * a), 0.5 * d);
      } else {
        out.exponent = 2.0;
        auto integrand = [&](double r) {
          double gg = green_fourier(op, t, r);
          return std::pow(r, d - 1.0) * gg * gg * std::exp(-0.5 * a * r * r);
        };
        double core = integrate_graded0(integrand, 1.0, 1e-11);
        double tail = integrate_tail(
            integrand, 1.0, [&](double R) { return gaussian_tail(d - 3.0, 0.5 * a, R); },
            1e-11);
        out.value = D * std::pow(kTwoPi, -d) * surface_area(d) * (core + tail);
      }
      return out;
    }
    case KernelFamily::Riesz: {
      double a = kernel.alpha;
      if (op.kind == OperatorKind::Heat) {
        out.exponent = d * (1.0 / p + a / (2.0 * d) - 1.0);
      } else if (d == 1) {
        out.exponent = 2.0 / p + a;
      } else if (d == 2) {
        if (!(p < 4.0 / (2.0 - a)))
          throw UnsupportedError("wave d=2 + riesz bound needs p < 4/(2-alpha)");
        out.exponent = 4.0 / p + a - 2.0;
      } else {
        throw UnsupportedError("wave d=3 green function is not a function (riesz branch)");
      }
      out.value = kInf;
      out.note = "constant unknown";
      return out;
    }
    case KernelFamily::Bessel: {
      if (op.kind == OperatorKind::Heat) {
        out.exponent = d * (1.0 - p) / p;
      } else if (d == 1) {
        out.exponent = 2.0 / p;
      } else {
        throw UnsupportedError("wave + bessel bound needs d = 1 (G_t not in L^p otherwise)");
      }
      out.value = kInf;
      out.note = "constant unknown";
      return out;
    }
    case KernelFamily::PoissonK:
    case KernelFamily::Product:
      throw UnsupportedError("kernel family not covered by the J_p bound branches");
  }
  return out;
}

MpResult m_p(const OperatorSpec& op, const KernelSpec& kernel, double t, double p,
             const GridResolution& res) {
  MpResult out;
  if (t == 0.0) return out;
  if (!(t > 0.0)) throw ConfigError("m_p needs t >= 0");

  // Analytic divergence gate from the bound exponent, when the pair is covered.
  bool have_exponent = false;
  double e_j = 0.0;
  try {
    e_j = j_p_bound(op, kernel, t, p).exponent;
    have_exponent = true;
  } catch (const UnsupportedError&) {
  }
  if (have_exponent && e_j * 0.5 * p <= -1.0) {
    out.diverged = true;
    out.value = kInf;
    return out;
  }

  auto integrand = [&](double s) {
    return std::pow(j_p_numeric(op, kernel, s, p, res), 0.5 * p);
  };
  const int levels = 40;
  double total = 0.0, hi = t, last_level = 0.0;
  for (int k = 0; k < levels; ++k) {
    double lo = hi * 0.5;
    last_level = integrate(integrand, lo, hi, 1e-9, 16);
    total += last_level;
    hi = lo;
  }
  // Numeric divergence screen for uncovered pairs: graded levels must decay.
  if (!have_exponent && last_level > 0.05 * total) {
    out.diverged = true;
    out.value = kInf;
    return out;
  }
  out.value = total;
  return out;
}

double linear_moment_bound(const OperatorSpec& op, const KernelSpec& kernel,
                           const LevyMeasureSpec& measure, double p, double t, double Bp,
                           const GridResolution& res) {
  double m2v = moment_m2(measure);
  double mpv = moment_mp(measure, p);
  double cp = rosenthal_constant(p, m2v, mpv, Bp); // gates mp < inf
  MpResult m2t = m_p(op, kernel, t, 2.0, res);
  MpResult mpt = m_p(op, kernel, t, p, res);
  if (m2t.diverged || mpt.diverged)
    throw MomentGateError("M_p(t) diverges for this operator/kernel/p combination");
  return cp * (std::pow(m2t.value, 0.5 * p) + mpt.value);
}

namespace {

// int_0^inf e^{-c beta t} g(t) dt with g(t) = J_p(t)^{p/2}; the tail beyond
// the adaptive range is bounded through the polynomial growth cap t^m.
struct LaplaceIntegral {
  double value = 0.0;
  double tail_bound = 0.0;
};

LaplaceIntegral laplace_time_integral(const std::function<double(double)>& g, double cbeta,
                                      double growth_cap) {
  LaplaceIntegral out;
  auto weighted = [&](double t) { return std::exp(-cbeta * t) * g(t); };
  // graded dyadic levels toward t = 0; a non-integrable singularity shows
  // up as level sums that stop decaying at the finest scales, where the
  // exponential weight is flat and only the t -> 0 behavior remains
  {
    double top = 1.0, core = 0.0;
    double levels[52];
    for (int k = 0; k < 52; ++k) {
      double lo0 = top * 0.5;
      levels[k] = integrate(weighted, lo0, top, 1e-10, 24);
      core += levels[k];
      top = lo0;
    }
    bool tail_decays = levels[51] < 0.999 * levels[50] ||
                       levels[51] <= 1e-10 * (core + 1e-300);
    if (!tail_decays) {
      out.value = kInf;
      return out;
    }
    out.value = core;
  }
  double lo = 1.0, hi = 2.0;
  for (int k = 0; k < 400; ++k) {
    out.value += integrate(weighted, lo, hi, 1e-10, 24);
    double gT = g(hi);
    double A = gT / std::pow(hi, growth_cap);
    double tb = A * std::exp(-0.5 * cbeta * hi) * std::tgamma(growth_cap + 1.0) *
                std::pow(2.0 / cbeta, growth_cap + 1.0);
    if (tb <= 1e-9 * (std::fabs(out.value) + 1e-300)) {
      out.tail_bound = tb;
      return out;
    }
    lo = hi;
    hi *= 2.0;
  }
  out.tail_bound = kInf;
  return out;
}

} // namespace

ABetaResult a_beta_p(const OperatorSpec& op, const KernelSpec& kernel, double beta, double p,
                     const GridResolution& res) {
  if (!(beta > 0.0)) throw ConfigError("a_beta_p needs beta > 0");
  if (!(p >= 2.0)) throw ConfigError("a_beta_p needs p >= 2");
  // growth caps: J_2 <= C t^2 and J_p^{p/2} <= C t^p for the wave operator;
  // the heat operator's J is nonincreasing at large t, cap 0
  double cap2 = op.kind == OperatorKind::Wave ? 2.0 : 0.0;
  double capp = op.kind == OperatorKind::Wave ? p : 0.0;

  auto j2 = [&](double t) { return j2_spectral(op, kernel, t, res.freq_cutoff); };
  LaplaceIntegral i2 = laplace_time_integral(j2, 2.0 * beta, cap2);

  ABetaResult out;
  if (p == 2.0) {
    out.value = i2.value + i2.value; // both terms coincide at p = 2
    out.certified_tail_error = 2.0 * i2.tail_bound;
    return out;
  }
  auto jp_pow = [&](double t) {
    return std::pow(j_p_numeric(op, kernel, t, p, res), 0.5 * p);
  };
  LaplaceIntegral ip = laplace_time_integral(jp_pow, p * beta, capp);
  out.value = std::pow(i2.value, 0.5 * p) + ip.value;
  out.certified_tail_error =
      0.5 * p * std::pow(i2.value + i2.tail_bound, 0.5 * p - 1.0) * i2.tail_bound +
      ip.tail_bound;
  return out;
}

BetaStarResult beta_star(const OperatorSpec& op, const KernelSpec& kernel,
                         const LevyMeasureSpec& measure, double p, double lip_sigma,
                         double Bp, double beta_min, double beta_max, int bisection_steps,
                         const GridResolution& res) {
  if (!(lip_sigma >= 0.0)) throw ConfigError("lip_sigma must be nonnegative");
  double m2v = moment_m2(measure);
  double mpv = moment_mp(measure, p);
  double cp = rosenthal_constant(p, m2v, mpv, Bp); // moment gate
  BetaStarResult out;
  if (lip_sigma == 0.0) return out; // contraction holds for every beta

  auto holds = [&](double beta) {
    double A = a_beta_p(op, kernel, beta, p, res).value;
    return std::pow(lip_sigma, p) * cp * A < 1.0;
  };
  if (holds(beta_min)) {
    out.value = 0.0;
    out.at_range_edge = true; // infimum is at or below the search floor
    return out;
  }
  if (!holds(beta_max)) {
    out.value = kInf;
    out.at_range_edge = true;
    return out;
  }
  double lo = std::log(beta_min), hi = std::log(beta_max);
  for (int i = 0; i < bisection_steps; ++i) {
    double mid = 0.5 * (lo + hi);
    if (holds(std::exp(mid))) hi = mid;
    else lo = mid;
  }
  out.value = std::exp(hi);
  return out;
}

double upsilon(const KernelSpec& kernel, const std::array<double, kMaxDim>& a, double beta) {
  kernel.validate();
  if (!(beta >= 0.0)) throw ConfigError("upsilon needs beta >= 0");
  const int d = kernel.dim;
  double lo[3], hi[3];
  for (int i = 0; i < d; ++i) {
    if (!(a[i] > 0.0)) throw ConfigError("upsilon box must avoid the origin (a > 0)");
    lo[i] = a[i];
    hi[i] = 2.0 * a[i];
  }
  auto f = [&](const double* p) {
    std::array<double, kMaxDim> xi{{0, 0, 0}};
    double n2 = 0.0;
    for (int i = 0; i < d; ++i) {
      xi[i] = p[i];
      n2 += p[i] * p[i];
    }
    return kernel_fourier_sq(kernel, xi) / (beta + n2);
  };
  return std::pow(kTwoPi, -d) * integrate_box(f, d, lo, hi, 48);
}

IntermittencyResult intermittency_check(const OperatorSpec& op, const KernelSpec& kernel,
                                        const LevyMeasureSpec& measure, double lip_lower,
                                        const IntermittencySearch& search) {
  op.validate();
  kernel.validate();
  if (!(lip_lower > 0.0)) throw ConfigError("intermittency check needs lip_lower > 0");
  if (!dalang_condition(kernel).holds)
    throw DalangError("intermittency check requires Dalang's condition");
  if (op.kind == OperatorKind::Wave && op.dim > 2)
    throw UnsupportedError("intermittency witness covers wave only for d <= 2");

  const double m2v = moment_m2(measure);
  const double threshold = 1.0 / (m2v * lip_lower * lip_lower);
  const bool is_heat = op.kind == OperatorKind::Heat;

  IntermittencyResult best;
  const double lstep = std::log(10.0) / search.points_per_decade;
  for (double la = std::log(search.a_min); la <= std::log(search.a_max) + 1e-12;
       la += lstep) {
    std::array<double, kMaxDim> a{};
    for (int i = 0; i < kernel.dim; ++i) a[i] = std::exp(la);
    double u0 = upsilon(kernel, a, 0.0);
    if (!(u0 > 0.0)) continue;
    if (is_heat && !(u0 > threshold)) continue;

    // crit(beta) >= threshold certifies gamma_bar(2) >= beta; crit decreasing
    auto crit = [&](double beta) {
      double u = upsilon(kernel, a, beta);
      return is_heat ? u : u / (2.0 * beta);
    };
    double lo = 0.0, hi = is_heat ? 1.0 : 1e-8;
    if (is_heat) {
      if (crit(0.0) <= threshold) continue;
      hi = 1e-6;
      while (hi < search.beta_max && crit(hi) >= threshold) {
        lo = hi;
        hi *= 2.0;
      }
    } else {
      while (hi < search.beta_max && crit(hi) >= threshold) {
        lo = hi;
        hi *= 2.0;
      }
      if (lo == 0.0) continue; // threshold not reached even for tiny beta
    }
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      if (crit(mid) >= threshold) lo = mid;
      else hi = mid;
    }
    if (lo > 0.0 && (!best.witness_beta || lo > *best.witness_beta)) {
      best.intermittent_lb = true;
      best.witness_a = a;
      best.witness_beta = lo;
    }
  }
  return best;
}

namespace {

struct MuSampler {
  double mass = 0.0;
  double xi_cut = 0.0;
  double neglected = 0.0;
  std::function<void(RngStream&, double*)> draw;
};

void draw_direction(RngStream& rng, int d, double* dir) {
  if (d == 1) {
    dir[0] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return;
  }
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (int i = 0; i < d; ++i) {
      dir[i] = rng.normal();
      n2 += dir[i] * dir[i];
    }
  } while (n2 == 0.0);
  double inv = 1.0 / std::sqrt(n2);
  for (int i = 0; i < d; ++i) dir[i] *= inv;
}

// Dalang-weighted mass of mu outside the centered ball of radius R.
double dalang_tail_outside(const KernelSpec& k, double R) {
  if (!k.isotropic()) return 0.0;
  const int d = k.dim;
  auto integrand = [&](double r) {
    return std::pow(r, d - 1.0) * kernel_fourier_sq_radial(k, r) / (1.0 + r * r);
  };
  double v = integrate_tail(
      integrand, R,
      [&](double RR) {
        switch (k.family) {
          case KernelFamily::Heat: return gaussian_tail(d - 1.0, 0.5 * k.alpha, RR);
          case KernelFamily::PoissonK: return exp_tail(d - 1.0, k.alpha, RR);
          default: return power_tail(d - 3.0 - k.alpha, RR);
        }
      },
      1e-9);
  return std::pow(kTwoPi, -d) * surface_area(d) * v;
}

double riesz_box_mass(int d, double alpha, double Xi) {
  return std::pow(kTwoPi, -d) * std::pow(2.0 * Xi, d) * cube_average_power(d, Xi, -alpha);
}

MuSampler build_isotropic_sampler(const KernelSpec& k) {
  MuSampler s;
  const int d = k.dim;
  switch (k.family) {
    case KernelFamily::Heat: {
      double a = k.alpha;
      s.mass = std::pow(kTwoPi * a, -0.5 * d);
      s.draw = [d, a](RngStream& rng, double* xi) {
        for (int i = 0; i < d; ++i) xi[i] = rng.normal() / std::sqrt(a);
      };
      return s;
    }
    case KernelFamily::PoissonK: {
      double a = k.alpha;
      s.mass = std::pow(kTwoPi, -d) * surface_area(d) * std::tgamma(static_cast<double>(d)) /
               std::pow(a, d);
      s.draw = [d, a](RngStream& rng, double* xi) {
        double r = rng.gamma(static_cast<double>(d), a);
        double dir[3];
        draw_direction(rng, d, dir);
        for (int i = 0; i < d; ++i) xi[i] = r * dir[i];
      };
      return s;
    }
    case KernelFamily::Riesz:
    case KernelFamily::Bessel: {
      double alpha = k.alpha;
      double total = dalang_condition(k).value;
      double Xi = 8.0;
      while (dalang_tail_outside(k, Xi) > 1e-3 * total && Xi < 1e7) Xi *= 2.0;
      s.xi_cut = Xi;
      s.neglected = dalang_tail_outside(k, Xi);
      if (k.family == KernelFamily::Riesz) {
        s.mass = riesz_box_mass(d, alpha, Xi);
        if (d == 1) {
          s.draw = [alpha, Xi](RngStream& rng, double* xi) {
            double r = Xi * std::pow(rng.uniform(), 1.0 / (1.0 - alpha));
            xi[0] = rng.uniform() < 0.5 ? -r : r;
          };
        } else {
          double Rout = Xi * std::sqrt(static_cast<double>(d));
          s.draw = [d, alpha, Xi, Rout](RngStream& rng, double* xi) {
            for (;;) {
              double r = Rout * std::pow(rng.uniform(), 1.0 / (d - alpha));
              double dir[3];
              draw_direction(rng, d, dir);
              bool in_box = true;
              for (int i = 0; i < d; ++i) {
                xi[i] = r * dir[i];
                if (std::fabs(xi[i]) > Xi) in_box = false;
              }
              if (in_box) return;
            }
          };
        }
      } else {
        double lo[3] = {-Xi, -Xi, -Xi}, hi[3] = {Xi, Xi, Xi};
        auto dens = [&](const double* p) {
          double n2 = 0.0;
          for (int i = 0; i < d; ++i) n2 += p[i] * p[i];
          return std::pow(1.0 + n2, -0.5 * alpha);
        };
        s.mass = std::pow(kTwoPi, -d) * integrate_box(dens, d, lo, hi, 64);
        double Rout = Xi * std::sqrt(static_cast<double>(d));
        // riesz-type envelope r^{-ae} with ae clipped below d so the radial
        // inverse CDF stays valid even when alpha >= d; the thinning ratio
        // r^{ae} (1+r^2)^{-alpha/2} <= 1 for ae <= alpha
        double ae = std::min(alpha, static_cast<double>(d) - 0.5);
        s.draw = [d, alpha, ae, Xi, Rout](RngStream& rng, double* xi) {
          for (;;) {
            double r = Rout * std::pow(rng.uniform(), 1.0 / (d - ae));
            double accept = std::pow(r, ae) * std::pow(1.0 + r * r, -0.5 * alpha);
            if (rng.uniform() >= accept) continue;
            double dir[3];
            draw_direction(rng, d, dir);
            bool in_box = true;
            for (int i = 0; i < d; ++i) {
              xi[i] = r * dir[i];
              if (std::fabs(xi[i]) > Xi) in_box = false;
            }
            if (in_box) return;
          }
        };
      }
      return s;
    }
    case KernelFamily::Product: break;
  }
  throw UnsupportedError("sampler: product handled separately");
}

MuSampler build_mu_sampler(const KernelSpec& k) {
  if (k.isotropic()) return build_isotropic_sampler(k);
  // product: independent 1-d draws per axis
  auto subs = std::make_shared<std::vector<MuSampler>>();
  MuSampler s;
  s.mass = 1.0;
  for (const auto& f : k.factors) {
    MuSampler fs = build_isotropic_sampler(f);
    s.mass *= fs.mass;
    s.xi_cut = std::max(s.xi_cut, fs.xi_cut);
    s.neglected += fs.neglected;
    subs->push_back(std::move(fs));
  }
  int d = k.dim;
  s.draw = [subs, d](RngStream& rng, double* xi) {
    for (int i = 0; i < d; ++i) {
      double x1[3];
      (*subs)[i].draw(rng, x1);
      xi[i] = x1[0];
    }
  };
  return s;
}

} // namespace

ChaosSeriesResult anderson_second_moment(const OperatorSpec& op, const KernelSpec& kernel,
                                         const LevyMeasureSpec& measure, double lambda,
                                         double eta, double t, int n_max,
                                         std::size_t samples, uint64_t seed) {
  op.validate();
  kernel.validate();
  if (!(lambda > 0.0)) throw ConfigError("anderson series needs lambda > 0");
  if (!(t > 0.0)) throw ConfigError("anderson series needs t > 0");
  if (n_max < 0 || n_max > 16) throw ConfigError("n_max must be in 0..16");
  if (!dalang_condition(kernel).holds)
    throw DalangError("anderson series requires Dalang's condition");

  const double m2v = moment_m2(measure);
  MuSampler mu = build_mu_sampler(kernel);
  const int d = op.dim;

  ChaosSeriesResult out;
  out.n_max = n_max;
  out.eta = eta;
  out.lambda = lambda;
  out.m2 = m2v;
  out.xi_cut = mu.xi_cut;
  out.neglected_mass = mu.neglected;

  out.terms.push_back({0, eta * eta, 0.0});
  double psum = eta * eta;
  for (int n = 1; n <= n_max; ++n) {
    double pref = eta * eta * std::pow(m2v * lambda * lambda, n) * std::pow(mu.mass, n);
    for (int j = 1; j <= n; ++j) pref *= t / static_cast<double>(j); // t^n / n!
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t srep = 0; srep < samples; ++srep) {
      RngStream rng(seed, 0, static_cast<uint64_t>(n), srep);
      double times[17];
      for (int j = 0; j < n; ++j) times[j] = t * rng.uniform();
      std::sort(times, times + n);
      times[n] = t;
      double eta_sum[3] = {0, 0, 0};
      double v = 1.0;
      for (int j = 0; j < n; ++j) {
        double xi[3];
        mu.draw(rng, xi);
        double n2 = 0.0;
        for (int i = 0; i < d; ++i) {
          eta_sum[i] += xi[i];
          n2 += eta_sum[i] * eta_sum[i];
        }
        double g = green_fourier(op, times[j + 1] - times[j], std::sqrt(n2));
        v *= g * g;
      }
      sum += v;
      sumsq += v * v;
    }
    double meanv = sum / static_cast<double>(samples);
    double varv = std::max(0.0, sumsq / static_cast<double>(samples) - meanv * meanv);
    double value = pref * meanv;
    double se = pref * std::sqrt(varv / static_cast<double>(samples));
    out.terms.push_back({n, value, se});
    psum += value;
  }
  out.partial_sum = psum;
  return out;
}

double lyapunov_exact(OperatorKind kind, int d, double kernel_alpha, double lambda,
                      double m2, double rho) {
  if (!(kernel_alpha > 0.0) || !(kernel_alpha < d))
    throw ConfigError("lyapunov_exact needs a riesz kernel order in (0, d)");
  if (!(rho > 0.0)) throw ConfigError("lyapunov_exact needs rho > 0");
  double ap = static_cast<double>(d) - kernel_alpha;
  double theta = std::sqrt(m2) * lambda;
  if (kind == OperatorKind::Heat) {
    if (ap >= 2.0) throw ConfigError("heat lyapunov formula needs alpha' < 2");
    return std::pow(theta * rho, 2.0 / (2.0 - ap));
  }
  if (ap >= 3.0) throw ConfigError("wave lyapunov formula needs alpha' < 3");
  return std::pow(std::pow(2.0, 1.0 - ap) * theta * rho, 1.0 / (3.0 - ap));
}

} // namespace spde
