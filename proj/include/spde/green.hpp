#pragma once

// Fundamental solutions G_t of the heat and wave operators, their Fourier
// transforms, and the Laplace-transform functional I_beta.

#include <array>
#include <string>

#include "spde/grid.hpp"

namespace spde {

enum class OperatorKind { Heat, Wave };

struct OperatorSpec {
  OperatorKind kind = OperatorKind::Heat;
  int dim = 1;

  static OperatorSpec heat(int dim);
  static OperatorSpec wave(int dim);
  void validate() const;
  bool wave_pointwise_ok() const { return kind != OperatorKind::Wave || dim <= 2; }
  std::string name() const { return kind == OperatorKind::Heat ? "heat" : "wave"; }
};

// G_t(x); zero for t < 0 by convention. Wave d=2 returns +infinity on the
// light cone; wave d=3 has no pointwise values.
double green_value(const OperatorSpec& op, double t, const std::array<double, kMaxDim>& x);

// F G_t(xi): heat exp(-t |xi|^2 / 2); wave sin(t|xi|)/|xi| with limit t at 0.
double green_fourier(const OperatorSpec& op, double t, double xi_norm);

// I_beta(xi) = int_0^inf e^{-beta t} |F G_t(xi)|^2 dt in closed form.
double laplace_green_sq(const OperatorSpec& op, double beta, double xi_norm);

// Total mass G_t(R^d) for the drift quadrature (heat: 1; wave d=1: t,
// d=2: t, d=3: t). Wave masses follow from F G_t(0) = t.
double green_mass(const OperatorSpec& op, double t);

} // namespace spde
