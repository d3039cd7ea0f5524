#pragma once

// Radix-2 complex FFT for power-of-two lengths, plus the d-dimensional
// transform applied axis by axis. Plans hold precomputed twiddles and a
// scratch line, so each worker thread keeps its own plan.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace spde {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

class FftPlan {
public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (!is_pow2(n)) throw std::invalid_argument("fft length must be a power of two");
    twiddle_.resize(n / 2);
    const double two_pi = 6.283185307179586476925286766559;
    for (std::size_t k = 0; k < n / 2; ++k) {
      double a = -two_pi * static_cast<double>(k) / static_cast<double>(n);
      twiddle_[k] = cplx(std::cos(a), std::sin(a));
    }
    rev_.resize(n);
    std::size_t logn = 0;
    while ((1u << logn) < n) ++logn;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < logn; ++b)
        if (i & (1u << b)) r |= 1u << (logn - 1 - b);
      rev_[i] = r;
    }
    line_.resize(n);
  }

  std::size_t size() const { return n_; }

  // In-place DFT with e^{-i 2 pi jk / n}; inverse = conjugate trick, unnormalized.
  void forward(cplx* data) const { transform(data, false); }
  void inverse_unnormalized(cplx* data) const { transform(data, true); }

  cplx* line() { return line_.data(); }

private:
  void transform(cplx* a, bool inverse) const {
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = rev_[i];
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      std::size_t step = n / len;
      for (std::size_t i = 0; i < n; i += len) {
        for (std::size_t k = 0; k < len / 2; ++k) {
          cplx w = twiddle_[k * step];
          if (inverse) w = std::conj(w);
          cplx u = a[i + k];
          cplx v = a[i + k + len / 2] * w;
          a[i + k] = u + v;
          a[i + k + len / 2] = u - v;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<cplx> twiddle_;
  std::vector<std::size_t> rev_;
  mutable std::vector<cplx> line_;
};

// d-dimensional transform of a row-major N^d array, same N along each axis.
class FftPlanNd {
public:
  FftPlanNd(int dim, std::size_t n) : dim_(dim), n_(n), plan_(n) {
    total_ = 1;
    for (int i = 0; i < dim; ++i) total_ *= n;
  }

  int dim() const { return dim_; }
  std::size_t n() const { return n_; }
  std::size_t total() const { return total_; }

  void forward(cplx* data) { transform(data, false); }
  void inverse_unnormalized(cplx* data) { transform(data, true); }

  // Full inverse including the 1/N^d normalization.
  void inverse(cplx* data) {
    transform(data, true);
    double s = 1.0 / static_cast<double>(total_);
    for (std::size_t i = 0; i < total_; ++i) data[i] *= s;
  }

private:
  void transform(cplx* data, bool inverse) {
    if (dim_ == 1) {
      if (inverse) plan_.inverse_unnormalized(data);
      else plan_.forward(data);
      return;
    }
    // Transform along each axis: gather the line, run the 1-d plan, scatter.
    for (int axis = 0; axis < dim_; ++axis) {
      std::size_t stride = 1;
      for (int i = axis + 1; i < dim_; ++i) stride *= n_;
      std::size_t block = stride * n_;
      std::size_t nlines = total_ / n_;
      cplx* line = plan_.line();
      for (std::size_t l = 0; l < nlines; ++l) {
        std::size_t outer = l / stride;
        std::size_t inner = l % stride;
        std::size_t base = outer * block + inner;
        for (std::size_t k = 0; k < n_; ++k) line[k] = data[base + k * stride];
        if (inverse) plan_.inverse_unnormalized(line);
        else plan_.forward(line);
        for (std::size_t k = 0; k < n_; ++k) data[base + k * stride] = line[k];
      }
    }
  }

  int dim_;
  std::size_t n_;
  std::size_t total_;
  FftPlan plan_;
};

} // namespace spde
