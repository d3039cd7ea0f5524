#pragma once

// Small statistics helpers shared by the estimators and tests.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace spde {

// Pairwise summation; order-stable and accurate for long accumulations.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(x.data(), x.size());
}

inline double mean(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("mean of empty sample");
  return pairwise_sum(x) / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
  if (x.size() < 2) throw std::invalid_argument("variance needs n >= 2");
  double m = mean(x);
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - m) * (x[i] - m);
  return pairwise_sum(sq) / static_cast<double>(x.size() - 1);
}

inline double std_error_of_mean(const std::vector<double>& x) {
  return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

// Ordinary least squares y ~ a + b x; stderr from residuals, optionally
// combined in quadrature with propagated per-point sigmas.
inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>* sigma_y = nullptr) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("least_squares needs n >= 2");
  double xm = mean(x), ym = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  double resid_var = n > 2 ? ss / static_cast<double>(n - 2) : 0.0;
  double var_slope = resid_var / sxx;
  if (sigma_y) {
    double prop = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double w = (x[i] - xm) / sxx;
      prop += w * w * (*sigma_y)[i] * (*sigma_y)[i];
    }
    var_slope += prop;
  }
  f.slope_stderr = std::sqrt(var_slope);
  return f;
}

} // namespace spde
