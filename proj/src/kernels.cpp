#include "spde/kernels.hpp"

#include <cmath>
#include <limits>

#include "spde/errors.hpp"
#include "spde/quad.hpp"

namespace spde {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double norm2(const std::array<double, kMaxDim>& x, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += x[a] * x[a];
  return s;
}

// C_{d,a} = pi^{-d/2} 2^{-a} Gamma((d-a)/2) / Gamma(a/2)
double riesz_constant(int d, double a) {
  return std::pow(kPi, -0.5 * d) * std::pow(2.0, -a) *
         std::tgamma(0.5 * (d - a)) / std::tgamma(0.5 * a);
}

double heat_value(int d, double a, double r2) {
  return std::pow(kTwoPi * a, -0.5 * d) * std::exp(-r2 / (2.0 * a));
}

double poisson_value(int d, double a, double r2) {
  return std::tgamma(0.5 * (d + 1)) / std::pow(kPi, 0.5 * (d + 1)) * a *
         std::pow(r2 + a * a, -0.5 * (d + 1));
}

// B_{d,a}(x) by quadrature of the defining w-integral.
double bessel_value(int d, double a, double r2) {
  if (r2 == 0.0 && a <= d) return kInf;
  auto integrand = [&](double w) {
    return std::pow(w, 0.5 * a - 1.0) * std::exp(-w) * std::pow(4.0 * kPi * w, -0.5 * d) *
           std::exp(-r2 / (4.0 * w));
  };
  double core = integrate_graded0(integrand, 1.0, 1e-12);
  double tail = integrate_tail(integrand, 1.0,
                               [&](double R) { return std::exp(-R) * std::pow(R, 0.5 * a); },
                               1e-12);
  return (core + tail) / std::tgamma(0.5 * a);
}

double family_value(KernelFamily fam, int d, double order, double r2) {
  switch (fam) {
    case KernelFamily::Heat: return heat_value(d, order, r2);
    case KernelFamily::Riesz:
      if (r2 == 0.0) return kInf;
      return riesz_constant(d, order) * std::pow(r2, -0.5 * (d - order));
    case KernelFamily::Bessel: return bessel_value(d, order, r2);
    case KernelFamily::PoissonK: return poisson_value(d, order, r2);
    case KernelFamily::Product: break;
  }
  throw UnsupportedError("family_value: product handled by caller");
}

} // namespace

KernelSpec KernelSpec::heat(double alpha, int dim) {
  KernelSpec k;
  k.family = KernelFamily::Heat;
  k.alpha = alpha;
  k.dim = dim;
  k.validate();
  return k;
}
KernelSpec KernelSpec::riesz(double alpha, int dim) {
  KernelSpec k;
  k.family = KernelFamily::Riesz;
  k.alpha = alpha;
  k.dim = dim;
  k.validate();
  return k;
}
KernelSpec KernelSpec::bessel(double alpha, int dim) {
  KernelSpec k;
  k.family = KernelFamily::Bessel;
  k.alpha = alpha;
  k.dim = dim;
  k.validate();
  return k;
}
KernelSpec KernelSpec::poisson(double alpha, int dim) {
  KernelSpec k;
  k.family = KernelFamily::PoissonK;
  k.alpha = alpha;
  k.dim = dim;
  k.validate();
  return k;
}
KernelSpec KernelSpec::product(std::vector<KernelSpec> factors) {
  KernelSpec k;
  k.family = KernelFamily::Product;
  k.dim = static_cast<int>(factors.size());
  k.factors = std::move(factors);
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  // dimensions above kMaxDim are classification-only (no grids, no values)
  if (dim < 1 || dim > 8) throw ConfigError("kernel dimension must be 1..8");
  switch (family) {
    case KernelFamily::Riesz:
      if (!(alpha > 0.0) || !(alpha < dim))
        throw ConfigError("riesz kernel needs 0 < alpha < d");
      break;
    case KernelFamily::Heat:
    case KernelFamily::Bessel:
    case KernelFamily::PoissonK:
      if (!(alpha > 0.0)) throw ConfigError("kernel order alpha must be positive");
      break;
    case KernelFamily::Product:
      if (factors.size() != static_cast<std::size_t>(dim))
        throw ConfigError("product kernel needs one factor per axis");
      for (const auto& f : factors) {
        if (f.dim != 1) throw ConfigError("product kernel factors must be 1-d");
        if (f.family == KernelFamily::Product)
          throw ConfigError("product kernel factors cannot be nested products");
        f.validate();
      }
      break;
  }
}

std::string KernelSpec::name() const {
  switch (family) {
    case KernelFamily::Heat: return "heat";
    case KernelFamily::Riesz: return "riesz";
    case KernelFamily::Bessel: return "bessel";
    case KernelFamily::PoissonK: return "poisson";
    case KernelFamily::Product: return "product";
  }
  return "?";
}

double kernel_value(const KernelSpec& k, const std::array<double, kMaxDim>& x) {
  if (k.dim > kMaxDim)
    throw UnsupportedError("pointwise kernel values need d <= 3");
  if (k.family == KernelFamily::Product) {
    double prod = 1.0;
    for (int a = 0; a < k.dim; ++a) {
      std::array<double, kMaxDim> xi{{x[a], 0.0, 0.0}};
      prod *= kernel_value(k.factors[a], xi);
    }
    return prod;
  }
  return family_value(k.family, k.dim, 0.5 * k.alpha, norm2(x, k.dim));
}

double kernel_fourier_sq_radial(const KernelSpec& k, double r) {
  switch (k.family) {
    case KernelFamily::Heat: return std::exp(-0.5 * k.alpha * r * r);
    case KernelFamily::Riesz: return r == 0.0 ? kInf : std::pow(r, -k.alpha);
    case KernelFamily::Bessel: return std::pow(1.0 + r * r, -0.5 * k.alpha);
    case KernelFamily::PoissonK: return std::exp(-k.alpha * r);
    case KernelFamily::Product: break;
  }
  throw UnsupportedError("radial spectrum undefined for product kernels");
}

double kernel_fourier_sq(const KernelSpec& k, const std::array<double, kMaxDim>& xi) {
  if (k.family == KernelFamily::Product) {
    double prod = 1.0;
    for (int a = 0; a < k.dim; ++a)
      prod *= kernel_fourier_sq_radial(k.factors[a], std::fabs(xi[a]));
    return prod;
  }
  return kernel_fourier_sq_radial(k, std::sqrt(norm2(xi, k.dim)));
}

double f_value(const KernelSpec& k, const std::array<double, kMaxDim>& x) {
  if (k.family == KernelFamily::Product) {
    double prod = 1.0;
    for (int a = 0; a < k.dim; ++a) {
      std::array<double, kMaxDim> xi{{x[a], 0.0, 0.0}};
      prod *= f_value(k.factors[a], xi);
    }
    return prod;
  }
  return family_value(k.family, k.dim, k.alpha, norm2(x, k.dim));
}

double cube_average_power(int dim, double h, double rho) {
  if (rho <= -dim) throw ConfigError("cube power average needs rho > -d");
  if (dim == 1) return std::pow(h, rho) / (1.0 + rho);
  if (dim == 2) {
    // int_cube |u|^rho du = 8 int_0^{pi/4} R(t)^{2+rho}/(2+rho) dt, R = h/cos t
    auto f = [&](double t) { return std::pow(h / std::cos(t), 2.0 + rho) / (2.0 + rho); };
    return 8.0 * integrate(f, 0.0, 0.25 * kPi, 1e-13) / (4.0 * h * h);
  }
  // d = 3: int_cube = int_{S^2} R(w)^{3+rho}/(3+rho) dw, R = h / max_i |w_i|
  auto f = [&](const double* tp) {
    double th = tp[0], ph = tp[1];
    double w0 = std::fabs(std::sin(th) * std::cos(ph));
    double w1 = std::fabs(std::sin(th) * std::sin(ph));
    double w2 = std::fabs(std::cos(th));
    double m = std::max(w0, std::max(w1, w2));
    double R = h / m;
    return std::sin(th) * std::pow(R, 3.0 + rho) / (3.0 + rho);
  };
  double lo[2] = {0.0, 0.0}, hi[2] = {kPi, kTwoPi};
  return integrate_box(f, 2, lo, hi, 96) / (8.0 * h * h * h);
}

double kernel_fourier_sq_zero_mode(const KernelSpec& k, const SimGrid& grid) {
  double h = 0.5 * grid.dxi();
  if (k.family == KernelFamily::Riesz) return cube_average_power(k.dim, h, -k.alpha);
  if (k.family == KernelFamily::Product) {
    double prod = 1.0;
    for (const auto& f : k.factors) {
      if (f.family == KernelFamily::Riesz)
        prod *= cube_average_power(1, h, -f.alpha);
      else
        prod *= kernel_fourier_sq_radial(f, 0.0);
    }
    return prod;
  }
  return kernel_fourier_sq_radial(k, 0.0);
}

std::vector<double> kernel_fourier_grid(const KernelSpec& k, const SimGrid& grid) {
  const std::size_t n = grid.n_space();
  std::vector<double> amp(n);
  if (k.family == KernelFamily::Product) {
    // Per-axis 1-d spectra with averaged zero modes, combined as a product.
    std::vector<std::vector<double>> axis(k.dim);
    double h = 0.5 * grid.dxi();
    for (int a = 0; a < k.dim; ++a) {
      axis[a].resize(grid.points);
      for (std::size_t m = 0; m < grid.points; ++m) {
        double r = std::fabs(static_cast<double>(grid.signed_index(m))) * grid.dxi();
        double v = (r == 0.0 && k.factors[a].family == KernelFamily::Riesz)
                       ? cube_average_power(1, h, -k.factors[a].alpha)
                       : kernel_fourier_sq_radial(k.factors[a], r);
        axis[a][m] = std::sqrt(v);
      }
    }
    std::array<std::size_t, kMaxDim> idx{};
    for (std::size_t m = 0; m < n; ++m) {
      grid.unflatten(m, idx);
      double prod = 1.0;
      for (int a = 0; a < k.dim; ++a) prod *= axis[a][idx[a]];
      amp[m] = prod;
    }
    return amp;
  }
  for (std::size_t m = 0; m < n; ++m) {
    double r2 = grid.frequency_norm2(m);
    double v = (r2 == 0.0) ? kernel_fourier_sq_zero_mode(k, grid)
                           : kernel_fourier_sq_radial(k, std::sqrt(r2));
    amp[m] = std::sqrt(v);
  }
  return amp;
}

DalangResult dalang_condition(const KernelSpec& k) {
  DalangResult res;
  int d = k.dim;
  switch (k.family) {
    case KernelFamily::Heat:
    case KernelFamily::PoissonK:
      res.holds = true;
      break;
    case KernelFamily::Riesz:
      res.holds = k.alpha > std::max(static_cast<double>(d) - 2.0, 0.0);
      break;
    case KernelFamily::Bessel:
      res.holds = k.alpha > static_cast<double>(d) - 2.0;
      break;
    case KernelFamily::Product: {
      // Exponentially decaying factors do not constrain the tail; the
      // algebraic factors must jointly decay faster than dimension minus 2.
      double alg_sum = 0.0;
      int n_alg = 0;
      for (const auto& f : k.factors) {
        if (f.family == KernelFamily::Riesz || f.family == KernelFamily::Bessel) {
          alg_sum += f.alpha;
          ++n_alg;
        }
      }
      res.holds = alg_sum > static_cast<double>(n_alg) - 2.0;
      break;
    }
  }
  if (!res.holds) {
    res.value = kInf;
    return res;
  }

  if (k.isotropic()) {
    const double surf = 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
    auto integrand = [&](double r) {
      return std::pow(r, d - 1) * kernel_fourier_sq_radial(k, r) / (1.0 + r * r);
    };
    double core = integrate_graded0(integrand, 1.0, 1e-11);
    std::function<double(double)> tail_bound;
    switch (k.family) {
      case KernelFamily::Heat:
        tail_bound = [&](double R) {
          return std::exp(-0.25 * k.alpha * R * R) * 0.5 * std::tgamma(0.5 * d) *
                 std::pow(4.0 / k.alpha, 0.5 * d);
        };
        break;
      case KernelFamily::PoissonK:
        tail_bound = [&](double R) {
          return std::exp(-0.5 * k.alpha * R) * std::tgamma(static_cast<double>(d)) *
                 std::pow(2.0 / k.alpha, d);
        };
        break;
      default: // riesz / bessel: integrand <= r^{d-3-alpha} beyond 1
        tail_bound = [&](double R) {
          return std::pow(R, d - 2.0 - k.alpha) / (k.alpha + 2.0 - d);
        };
        break;
    }
    double tail = integrate_tail(integrand, 1.0, tail_bound, 1e-11);
    res.value = std::pow(kTwoPi, -d) * surf * (core + tail);
    return res;
  }

  // Product kernel: graded tensor quadrature over an expanding box.
  double prev = 0.0;
  for (double R = 4.0; R <= 4096.0; R *= 4.0) {
    std::vector<double> segs{0.0};
    for (int j = 24; j >= 0; --j) segs.push_back(R / std::pow(2.0, j));
    double total = 0.0;
    std::vector<int> sidx(d, 0);
    const int nseg = static_cast<int>(segs.size()) - 1;
    std::vector<int> cursor(d, 0);
    // iterate over all segment combinations in the positive orthant; use
    // symmetry (integrand even per axis) with a 2^d multiplier
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
        return kernel_fourier_sq(k, xi) / (1.0 + n2);
      };
      total += integrate_box(f, d, lo, hi, 8);
      int a = d - 1;
      while (a >= 0 && ++cursor[a] == nseg) {
        cursor[a] = 0;
        --a;
      }
      if (a < 0) break;
    }
    total *= std::pow(2.0, d) * std::pow(kTwoPi, -d);
    if (R > 4.0 && std::fabs(total - prev) < 1e-6 * std::fabs(total)) {
      res.value = total;
      return res;
    }
    prev = total;
  }
  res.value = prev;
  return res;
}

namespace {

// Per-axis cell average of a 1-d gaussian of variance parameter a:
// (1/dx) int_{c-h}^{c+h} (2 pi a)^{-1/2} exp(-u^2/(2a)) du
double gauss1_cell_avg(double c, double h, double a) {
  double s = std::sqrt(2.0 * a);
  return 0.5 * (std::erf((c + h) / s) - std::erf((c - h) / s)) / (2.0 * h);
}

// (1/dx) int of (4 pi w)^{-1/2} exp(-u^2/(4w)) over the cell
double heatw_cell_avg(double c, double h, double w) {
  double s = 2.0 * std::sqrt(w);
  return 0.5 * (std::erf((c + h) / s) - std::erf((c - h) / s)) / (2.0 * h);
}

double cell_avg_quadrature(const KernelSpec& k, const std::array<double, kMaxDim>& center,
                           double h) {
  double lo[3], hi[3];
  for (int a = 0; a < k.dim; ++a) {
    lo[a] = center[a] - h;
    hi[a] = center[a] + h;
  }
  auto f = [&](const double* p) {
    std::array<double, kMaxDim> x{{0, 0, 0}};
    for (int a = 0; a < k.dim; ++a) x[a] = p[a];
    return kernel_value(k, x);
  };
  return integrate_box(f, k.dim, lo, hi, 12) / std::pow(2.0 * h, k.dim);
}

// Fixed composite quadrature nodes on (0, inf) for the Bessel w-integral.
struct WNodes {
  std::vector<double> w, wt;
};

WNodes bessel_w_nodes(double a_half) {
  WNodes out;
  std::vector<double> gx, gw;
  gauss_legendre(8, gx, gw);
  auto add_segment = [&](double lo, double hi) {
    for (int i = 0; i < 8; ++i) {
      double mid = 0.5 * (lo + hi), hl = 0.5 * (hi - lo);
      out.w.push_back(mid + hl * gx[i]);
      out.wt.push_back(hl * gw[i]);
    }
  };
  double hi = 1.0;
  for (int j = 0; j < 48; ++j) {
    add_segment(hi * 0.5, hi);
    hi *= 0.5;
  }
  double lo = 1.0;
  double top = 60.0 + 10.0 * a_half;
  while (lo < top) {
    add_segment(lo, std::min(lo * 1.5, top));
    lo *= 1.5;
  }
  return out;
}

std::vector<double> bessel_cell_averages(const KernelSpec& k, const SimGrid& grid) {
  const double a = 0.5 * k.alpha; // kappa = B_{d, alpha/2}
  const double h = 0.5 * grid.dx();
  const std::size_t N = grid.points;
  WNodes nodes = bessel_w_nodes(a);
  const std::size_t nw = nodes.w.size();

  // per-axis factors: G[m][q] for axis offset m and w-node q
  std::vector<double> G(N * nw);
  for (std::size_t m = 0; m < N; ++m) {
    double c = static_cast<double>(grid.signed_index(m)) * grid.dx();
    for (std::size_t q = 0; q < nw; ++q)
      G[m * nw + q] = heatw_cell_avg(c, h, nodes.w[q]);
  }
  std::vector<double> base(nw);
  for (std::size_t q = 0; q < nw; ++q)
    base[q] = nodes.wt[q] * std::pow(nodes.w[q], a * 0.5 - 1.0) * std::exp(-nodes.w[q]) /
              std::tgamma(a * 0.5);

  std::vector<double> out(grid.n_space());
  std::array<std::size_t, kMaxDim> idx{};
  for (std::size_t j = 0; j < out.size(); ++j) {
    grid.unflatten(j, idx);
    double sum = 0.0;
    for (std::size_t q = 0; q < nw; ++q) {
      double prod = base[q];
      for (int axis = 0; axis < k.dim; ++axis) prod *= G[idx[axis] * nw + q];
      sum += prod;
    }
    out[j] = sum;
  }
  return out;
}

} // namespace

std::vector<double> kernel_cell_averages(const KernelSpec& k, const SimGrid& grid) {
  grid.validate();
  if (grid.dim != k.dim) throw ConfigError("kernel / grid dimension mismatch");
  const std::size_t n = grid.n_space();
  const std::size_t N = grid.points;
  const double dx = grid.dx();
  const double h = 0.5 * dx;
  std::vector<double> out(n);

  auto separable = [&](const std::function<double(int, double)>& axis_avg) {
    std::vector<std::vector<double>> ax(k.dim, std::vector<double>(N));
    for (int a = 0; a < k.dim; ++a)
      for (std::size_t m = 0; m < N; ++m)
        ax[a][m] = axis_avg(a, static_cast<double>(grid.signed_index(m)) * dx);
    std::array<std::size_t, kMaxDim> idx{};
    for (std::size_t j = 0; j < n; ++j) {
      grid.unflatten(j, idx);
      double prod = 1.0;
      for (int a = 0; a < k.dim; ++a) prod *= ax[a][idx[a]];
      out[j] = prod;
    }
  };

  switch (k.family) {
    case KernelFamily::Heat: {
      const double a = 0.5 * k.alpha;
      separable([&](int, double c) { return gauss1_cell_avg(c, h, a); });
      return out;
    }
    case KernelFamily::Product: {
      separable([&](int axis, double c) {
        const KernelSpec& f = k.factors[axis];
        switch (f.family) {
          case KernelFamily::Heat: return gauss1_cell_avg(c, h, 0.5 * f.alpha);
          case KernelFamily::Riesz: {
            double aa = 0.5 * f.alpha; // kappa = C |x|^{aa-1}
            double C = riesz_constant(1, aa);
            if (std::fabs(c) < h * 0.5)
              return C * cube_average_power(1, h, aa - 1.0);
            auto anti = [&](double x) {
              return std::copysign(std::pow(std::fabs(x), aa), x) / aa;
            };
            return C * (anti(c + h) - anti(c - h)) / (2.0 * h);
          }
          case KernelFamily::PoissonK: {
            double aa = 0.5 * f.alpha;
            return (std::atan((c + h) / aa) - std::atan((c - h) / aa)) / (kPi * 2.0 * h);
          }
          case KernelFamily::Bessel: {
            const double ab = 0.5 * f.alpha;
            WNodes nodes = bessel_w_nodes(ab);
            double sum = 0.0;
            for (std::size_t q = 0; q < nodes.w.size(); ++q)
              sum += nodes.wt[q] * std::pow(nodes.w[q], ab * 0.5 - 1.0) *
                     std::exp(-nodes.w[q]) * heatw_cell_avg(c, h, nodes.w[q]);
            return sum / std::tgamma(ab * 0.5);
          }
          case KernelFamily::Product: break;
        }
        throw UnsupportedError("nested product kernel");
      });
      return out;
    }
    case KernelFamily::Bessel:
      return bessel_cell_averages(k, grid);
    case KernelFamily::Riesz: {
      const double a = 0.5 * k.alpha;          // kappa order
      const double expo = -(k.dim - a);        // |x|^expo
      const double C = riesz_constant(k.dim, a);
      std::array<std::size_t, kMaxDim> idx{};
      std::array<double, kMaxDim> c{};
      for (std::size_t j = 0; j < n; ++j) {
        grid.unflatten(j, idx);
        bool origin = true;
        for (int axis = 0; axis < k.dim; ++axis) {
          c[axis] = static_cast<double>(grid.signed_index(idx[axis])) * dx;
          if (idx[axis] != 0) origin = false;
        }
        if (origin) {
          out[j] = C * cube_average_power(k.dim, h, expo);
        } else if (k.dim == 1) {
          auto anti = [&](double x) {
            return std::copysign(std::pow(std::fabs(x), a), x) / a;
          };
          out[j] = C * (anti(c[0] + h) - anti(c[0] - h)) / (2.0 * h);
        } else {
          out[j] = cell_avg_quadrature(k, c, h);
        }
      }
      return out;
    }
    case KernelFamily::PoissonK: {
      if (k.dim == 1) {
        const double a = 0.5 * k.alpha;
        separable([&](int, double c) {
          return (std::atan((c + h) / a) - std::atan((c - h) / a)) / (kPi * 2.0 * h);
        });
        return out;
      }
      std::array<std::size_t, kMaxDim> idx{};
      std::array<double, kMaxDim> c{};
      for (std::size_t j = 0; j < n; ++j) {
        grid.unflatten(j, idx);
        for (int axis = 0; axis < k.dim; ++axis)
          c[axis] = static_cast<double>(grid.signed_index(idx[axis])) * dx;
        out[j] = cell_avg_quadrature(k, c, h);
      }
      return out;
    }
  }
  throw UnsupportedError("unreachable kernel family");
}

ColoringOperator::ColoringOperator(const KernelSpec& kernel, const SimGrid& grid) {
  std::vector<double> table = kernel_cell_averages(kernel, grid);
  kernel_dft_.assign(table.begin(), table.end());
  FftPlanNd plan(grid.dim, grid.points);
  plan.forward(kernel_dft_.data());
}

void ColoringOperator::apply(const std::vector<double>& field, std::vector<double>& out,
                             SpectralGrid& ws) const {
  std::vector<cplx> spec(field.begin(), field.end());
  if (spec.size() != kernel_dft_.size()) throw ConfigError("field / kernel size mismatch");
  ws.dft(spec);
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= kernel_dft_[m];
  ws.idft(spec);
  out.resize(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) out[i] = spec[i].real();
}

std::vector<double> convolve_periodic(const std::vector<double>& field,
                                      const KernelSpec& kernel, const SimGrid& grid) {
  if (field.size() != grid.n_space()) throw ConfigError("field does not match grid shape");
  ColoringOperator op(kernel, grid);
  SpectralGrid ws(grid);
  std::vector<double> out;
  op.apply(field, out, ws);
  return out;
}

} // namespace spde
