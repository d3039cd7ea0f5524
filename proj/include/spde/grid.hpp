#pragma once

// Periodic torus discretization of [0,T] x [-L,L]^d and the scaled
// spectral transforms that mirror the continuum Fourier conventions:
//   Fhat[m] = dx^d sum_j f[j] exp(-i xi_m . x_j),  xi_m = pi m_signed / L,
//   f[j]    = (2 pi)^-d sum_m Fhat[m] exp(+i xi_m . x_j) dxi^d.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "spde/fft.hpp"

namespace spde {

constexpr int kMaxDim = 3;
constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kTwoPi = 2.0 * kPi;

struct SimGrid {
  int dim = 1;
  double half_width = 1.0;   // L
  std::size_t points = 64;   // N per axis, power of two
  double time_step = 0.01;   // dt
  double horizon = 1.0;      // T

  void validate() const {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("grid dimension must be 1..3");
    if (!is_pow2(points)) throw std::invalid_argument("grid points per axis must be a power of two");
    if (!(half_width > 0.0) || !(time_step > 0.0) || !(horizon > 0.0))
      throw std::invalid_argument("grid sizes must be positive");
  }

  double dx() const { return 2.0 * half_width / static_cast<double>(points); }
  double dxi() const { return kPi / half_width; }
  double cell_space_vol() const { return std::pow(dx(), dim); }
  double cell_vol() const { return time_step * cell_space_vol(); }
  double freq_cell_vol() const { return std::pow(dxi(), dim); }

  std::size_t n_space() const {
    std::size_t t = 1;
    for (int i = 0; i < dim; ++i) t *= points;
    return t;
  }
  std::size_t n_steps() const {
    return static_cast<std::size_t>(std::llround(horizon / time_step));
  }

  // Signed index along one axis: m in [0,N) -> m or m-N.
  long signed_index(std::size_t m) const {
    return m < points / 2 ? static_cast<long>(m)
                          : static_cast<long>(m) - static_cast<long>(points);
  }

  void unflatten(std::size_t flat, std::array<std::size_t, kMaxDim>& idx) const {
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = flat % points;
      flat /= points;
    }
  }

  // Physical coordinate of grid node j (node j sits at -L + j dx).
  void node_coord(std::size_t flat, std::array<double, kMaxDim>& x) const {
    std::array<std::size_t, kMaxDim> idx{};
    unflatten(flat, idx);
    for (int a = 0; a < dim; ++a)
      x[a] = -half_width + static_cast<double>(idx[a]) * dx();
  }

  // Wrapped (signed) offset coordinate of index j, used for kernels on the torus.
  void offset_coord(std::size_t flat, std::array<double, kMaxDim>& x) const {
    std::array<std::size_t, kMaxDim> idx{};
    unflatten(flat, idx);
    for (int a = 0; a < dim; ++a)
      x[a] = static_cast<double>(signed_index(idx[a])) * dx();
  }

  void frequency(std::size_t flat, std::array<double, kMaxDim>& xi) const {
    std::array<std::size_t, kMaxDim> idx{};
    unflatten(flat, idx);
    for (int a = 0; a < dim; ++a)
      xi[a] = static_cast<double>(signed_index(idx[a])) * dxi();
  }

  double frequency_norm2(std::size_t flat) const {
    std::array<double, kMaxDim> xi{};
    frequency(flat, xi);
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += xi[a] * xi[a];
    return s;
  }

  // Parity of the signed multi-index; exp(-i xi_m . (-L,...)) = (-1)^parity.
  double phase(std::size_t flat) const {
    std::array<std::size_t, kMaxDim> idx{};
    unflatten(flat, idx);
    std::size_t s = 0;
    for (int a = 0; a < dim; ++a) s += idx[a];
    return (s & 1) ? -1.0 : 1.0;
  }
};

// Spectral workspace bound to one grid. Not thread-safe; one per worker.
class SpectralGrid {
public:
  explicit SpectralGrid(const SimGrid& g) : grid_(g), plan_(g.dim, g.points) {
    grid_.validate();
  }

  const SimGrid& grid() const { return grid_; }
  std::size_t n() const { return plan_.total(); }

  // Scaled forward transform of a real field; matches the continuum FT.
  std::vector<cplx> to_spectral(const std::vector<double>& field) {
    if (field.size() != n()) throw std::invalid_argument("field size mismatch");
    std::vector<cplx> out(n());
    for (std::size_t i = 0; i < n(); ++i) out[i] = field[i];
    plan_.forward(out.data());
    double scale = grid_.cell_space_vol();
    for (std::size_t m = 0; m < n(); ++m) out[m] *= scale * grid_.phase(m);
    return out;
  }

  // Scaled inverse; returns the real part.
  std::vector<double> to_field(std::vector<cplx> spec) {
    if (spec.size() != n()) throw std::invalid_argument("spectrum size mismatch");
    for (std::size_t m = 0; m < n(); ++m) spec[m] *= grid_.phase(m);
    plan_.inverse_unnormalized(spec.data());
    double scale = 1.0 / (grid_.cell_space_vol() * static_cast<double>(n()));
    std::vector<double> out(n());
    for (std::size_t i = 0; i < n(); ++i) out[i] = spec[i].real() * scale;
    return out;
  }

  // Raw DFT access for circular convolutions (no physical scaling).
  void dft(std::vector<cplx>& data) { plan_.forward(data.data()); }
  void idft(std::vector<cplx>& data) { plan_.inverse(data.data()); }

private:
  SimGrid grid_;
  FftPlanNd plan_;
};

} // namespace spde
