#pragma once

// Coloring kernels kappa: closed-form values, Fourier data |F kappa|^2
// (the density of mu up to (2 pi)^-d), covariance kernel f = kappa * kappa~,
// the Dalang classifier, and the periodic grid convolution engine.

#include <array>
#include <string>
#include <vector>

#include "spde/grid.hpp"

namespace spde {

enum class KernelFamily { Heat, Riesz, Bessel, PoissonK, Product };

// alpha is the order of the covariance kernel f; kappa has order alpha/2,
// so |F kappa(xi)|^2 equals the family closed form of order alpha.
struct KernelSpec {
  KernelFamily family = KernelFamily::Heat;
  double alpha = 1.0;
  int dim = 1;
  std::vector<KernelSpec> factors; // Product: one 1-d spec per axis

  static KernelSpec heat(double alpha, int dim);
  static KernelSpec riesz(double alpha, int dim);
  static KernelSpec bessel(double alpha, int dim);
  static KernelSpec poisson(double alpha, int dim);
  static KernelSpec product(std::vector<KernelSpec> factors);

  void validate() const;
  bool isotropic() const { return family != KernelFamily::Product; }
  std::string name() const;
};

// kappa(x); +infinity at the Riesz/Bessel singularity.
double kernel_value(const KernelSpec& kernel, const std::array<double, kMaxDim>& x);

// |F kappa(xi)|^2; +infinity at xi = 0 for Riesz.
double kernel_fourier_sq(const KernelSpec& kernel, const std::array<double, kMaxDim>& xi);

// Radial profile of |F kappa|^2 for isotropic kernels.
double kernel_fourier_sq_radial(const KernelSpec& kernel, double r);

// f(x) = (kappa * kappa~)(x), the closed-form member of doubled order.
double f_value(const KernelSpec& kernel, const std::array<double, kMaxDim>& x);

struct DalangResult {
  bool holds = false;
  double value = 0.0; // quadrature of int (1+|xi|^2)^-1 mu(dxi) when it holds
};
DalangResult dalang_condition(const KernelSpec& kernel);

// Analytic average of |xi|^rho over the cube [-h,h]^d (rho > -d).
double cube_average_power(int dim, double h, double rho);

// Average of |F kappa|^2 over the fundamental frequency cell, used as the
// zero mode of singular spectra on the discrete grid.
double kernel_fourier_sq_zero_mode(const KernelSpec& kernel, const SimGrid& grid);

// F kappa sampled on the grid frequencies (amplitude, nonnegative); the
// Riesz zero mode carries sqrt of the averaged |F kappa|^2.
std::vector<double> kernel_fourier_grid(const KernelSpec& kernel, const SimGrid& grid);

// Cell averages of the wrapped kernel over every torus offset cell.
std::vector<double> kernel_cell_averages(const KernelSpec& kernel, const SimGrid& grid);

// Circular convolution of a field with the periodized cell-averaged kernel,
// computed spectrally. Linear in the field.
std::vector<double> convolve_periodic(const std::vector<double>& field,
                                      const KernelSpec& kernel, const SimGrid& grid);

// Same, with a precomputed kernel table (spectral multiplier reused).
class ColoringOperator {
public:
  ColoringOperator(const KernelSpec& kernel, const SimGrid& grid);
  void apply(const std::vector<double>& field, std::vector<double>& out, SpectralGrid& ws) const;

  const std::vector<cplx>& kernel_dft() const { return kernel_dft_; }

private:
  std::vector<cplx> kernel_dft_;
};

} // namespace spde
