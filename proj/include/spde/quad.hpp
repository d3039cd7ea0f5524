#pragma once

// Deterministic quadrature helpers: adaptive Gauss-Kronrod 15(7) on finite
// intervals, a geometrically graded composite for endpoint singularities,
// and Gauss-Legendre tensor rules for smooth box integrals.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace spde {

namespace quad_detail {
inline const double gk_nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline const double gk_wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline const double gk_wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};
} // namespace quad_detail

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

inline QuadResult gk15(const std::function<double(double)>& f, double a, double b) {
  using namespace quad_detail;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fk = 0.0, fg = 0.0;
  for (int i = 0; i < 8; ++i) {
    double v;
    if (i == 7) {
      v = f(c);
      fk += gk_wk[i] * v;
      fg += gk_wg[3] * v;
    } else {
      double v1 = f(c - h * gk_nodes[i]);
      double v2 = f(c + h * gk_nodes[i]);
      v = v1 + v2;
      fk += gk_wk[i] * v;
      if (i % 2 == 1) fg += gk_wg[i / 2] * v;
    }
  }
  QuadResult r;
  r.value = fk * h;
  r.error = std::fabs((fk - fg) * h);
  return r;
}

// Adaptive bisection on [a,b]; abs/rel tolerance against the running total.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-11, int max_depth = 48) {
  struct Seg { double a, b; QuadResult r; int depth; };
  QuadResult whole = gk15(f, a, b);
  std::vector<Seg> stack{{a, b, whole, 0}};
  double total = 0.0;
  double scale = std::fabs(whole.value) + 1e-300;
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    if (s.r.error <= tol * std::max(1.0, scale) * 0.5 * (s.b - s.a) / (b - a + 1e-300) ||
        s.r.error <= 1e-16 * std::fabs(s.r.value) || s.depth >= max_depth) {
      total += s.r.value;
      continue;
    }
    double m = 0.5 * (s.a + s.b);
    QuadResult left = gk15(f, s.a, m), right = gk15(f, m, s.b);
    stack.push_back({s.a, m, left, s.depth + 1});
    stack.push_back({m, s.b, right, s.depth + 1});
    scale = std::max(scale, std::fabs(left.value) + std::fabs(right.value));
  }
  return total;
}

// Composite rule on (0,b] graded geometrically toward 0, for integrable
// endpoint singularities x^{-gamma}, gamma < 1.
inline double integrate_graded0(const std::function<double(double)>& f, double b,
                                double tol = 1e-11, int levels = 52) {
  double total = 0.0;
  double hi = b;
  for (int k = 0; k < levels; ++k) {
    double lo = hi * 0.5;
    total += integrate(f, lo, hi, tol, 24);
    hi = lo;
  }
  return total;
}

// Integral over [a, infinity) of a function with certified-decay callback:
// tail_bound(R) must bound | int_R^inf f |. Expands R geometrically.
inline double integrate_tail(const std::function<double(double)>& f, double a,
                             const std::function<double(double)>& tail_bound,
                             double tol = 1e-11) {
  double total = 0.0;
  double lo = a, hi = std::max(2.0 * std::fabs(a), a + 1.0);
  for (int k = 0; k < 200; ++k) {
    total += integrate(f, lo, hi, tol, 30);
    double tb = tail_bound(hi);
    if (tb <= tol * (std::fabs(total) + 1.0)) return total + 0.0;
    lo = hi;
    hi *= 2.0;
  }
  return total;
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on Legendre P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p0 / pp;
      if (std::fabs(z - z1) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// Tensor Gauss-Legendre over a box in up to 3 dimensions.
inline double integrate_box(const std::function<double(const double*)>& f, int dim,
                            const double* lo, const double* hi, int order = 32) {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  double total = 0.0;
  std::vector<int> idx(dim, 0);
  for (;;) {
    double pt[3] = {0, 0, 0};
    double wt = 1.0;
    for (int a = 0; a < dim; ++a) {
      double mid = 0.5 * (lo[a] + hi[a]), half = 0.5 * (hi[a] - lo[a]);
      pt[a] = mid + half * x[idx[a]];
      wt *= half * w[idx[a]];
    }
    total += wt * f(pt);
    int a = dim - 1;
    while (a >= 0 && ++idx[a] == order) {
      idx[a] = 0;
      --a;
    }
    if (a < 0) break;
  }
  return total;
}

} // namespace spde
