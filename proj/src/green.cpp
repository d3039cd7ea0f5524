#include "spde/green.hpp"

#include <cmath>
#include <limits>

#include "spde/errors.hpp"

namespace spde {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

OperatorSpec OperatorSpec::heat(int dim) {
  OperatorSpec op;
  op.kind = OperatorKind::Heat;
  op.dim = dim;
  op.validate();
  return op;
}

OperatorSpec OperatorSpec::wave(int dim) {
  OperatorSpec op;
  op.kind = OperatorKind::Wave;
  op.dim = dim;
  op.validate();
  return op;
}

void OperatorSpec::validate() const {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("operator dimension must be 1..3");
}

double green_value(const OperatorSpec& op, double t, const std::array<double, kMaxDim>& x) {
  if (t < 0.0) return 0.0;
  if (!(t > 0.0)) throw ConfigError("green_value needs t > 0");
  double r2 = 0.0;
  for (int a = 0; a < op.dim; ++a) r2 += x[a] * x[a];
  if (op.kind == OperatorKind::Heat)
    return std::pow(kTwoPi * t, -0.5 * op.dim) * std::exp(-r2 / (2.0 * t));
  double r = std::sqrt(r2);
  if (op.dim == 1) return r < t ? 0.5 : 0.0;
  if (op.dim == 2) {
    if (r > t) return 0.0;
    if (r == t) return kInf; // light cone
    return 1.0 / (kTwoPi * std::sqrt(t * t - r2));
  }
  throw UnsupportedError("wave green function has no pointwise values for d >= 3");
}

double green_fourier(const OperatorSpec& op, double t, double xi_norm) {
  if (t < 0.0) return 0.0;
  if (op.kind == OperatorKind::Heat) return std::exp(-0.5 * t * xi_norm * xi_norm);
  if (xi_norm == 0.0) return t;
  double u = t * xi_norm;
  // guard tiny arguments so the removable singularity stays smooth
  if (u < 1e-8) return t * (1.0 - u * u / 6.0);
  return std::sin(u) / xi_norm;
}

double laplace_green_sq(const OperatorSpec& op, double beta, double xi_norm) {
  if (!(beta > 0.0)) throw ConfigError("laplace_green_sq needs beta > 0");
  double k2 = xi_norm * xi_norm;
  if (op.kind == OperatorKind::Heat) return 1.0 / (beta + k2);
  return 1.0 / (2.0 * beta) / (0.25 * beta * beta + k2);
}

double green_mass(const OperatorSpec& op, double t) {
  if (t < 0.0) return 0.0;
  return op.kind == OperatorKind::Heat ? 1.0 : t;
}

} // namespace spde
