#pragma once

// Counter-based random streams (Philox4x32-10) plus the variate samplers
// used by the noise generators. Every stream is addressed by
// (seed, replicate, purpose, cell), so parallel generation is
// order-independent: the same address always yields the same draws.

#include <cstdint>
#include <cmath>
#include <stdexcept>

namespace spde {

struct Philox4x32 {
  uint32_t key[2];
  uint32_t ctr[4];

  static inline uint32_t mulhi(uint32_t a, uint32_t b) {
    return static_cast<uint32_t>((static_cast<uint64_t>(a) * b) >> 32);
  }

  void round_once() {
    const uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    uint32_t hi0 = mulhi(M0, ctr[0]), lo0 = M0 * ctr[0];
    uint32_t hi1 = mulhi(M1, ctr[2]), lo1 = M1 * ctr[2];
    uint32_t c0 = hi1 ^ ctr[1] ^ key[0];
    uint32_t c1 = lo1;
    uint32_t c2 = hi0 ^ ctr[3] ^ key[1];
    uint32_t c3 = lo0;
    ctr[0] = c0; ctr[1] = c1; ctr[2] = c2; ctr[3] = c3;
    key[0] += 0x9E3779B9u;
    key[1] += 0xBB67AE85u;
  }

  void run10() {
    for (int i = 0; i < 10; ++i) round_once();
  }
};

// Packs a stream address into the upper 64 bits of the Philox counter.
// Limits: replicate < 2^20, purpose < 2^20, cell < 2^24.
inline uint64_t pack_stream(uint64_t replicate, uint64_t purpose, uint64_t cell) {
  if (replicate >= (1ull << 20) || purpose >= (1ull << 20) || cell >= (1ull << 24))
    throw std::invalid_argument("rng stream address out of range");
  return (replicate << 44) | (purpose << 24) | cell;
}

class RngStream {
public:
  RngStream(uint64_t seed, uint64_t stream_id)
      : seed_(seed), stream_(stream_id), pos_(0), buf_fill_(0), have_normal_(false), cached_normal_(0.0) {}

  RngStream(uint64_t seed, uint64_t replicate, uint64_t purpose, uint64_t cell)
      : RngStream(seed, pack_stream(replicate, purpose, cell)) {}

  uint32_t next_u32() {
    if (buf_fill_ == 0) refill();
    return buf_[--buf_fill_];
  }

  uint64_t next_u64() {
    uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on (0,1), strictly inside so log() is safe.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (have_normal_) {
      have_normal_ = false;
      return cached_normal_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_normal_ = r * std::sin(a);
    have_normal_ = true;
    return r * std::cos(a);
  }

  // Gamma(shape, rate) by Marsaglia-Tsang, with the U^(1/a) boost for shape < 1.
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw std::invalid_argument("gamma sampler needs positive shape and rate");
    double boost = 1.0;
    if (shape < 1.0) {
      boost = std::pow(uniform(), 1.0 / shape);
      shape += 1.0;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return boost * d * v / rate;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return boost * d * v / rate;
    }
  }

  // Poisson(mean): product method for small means, Hormann's PTRD otherwise.
  uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson sampler needs mean >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
      double limit = std::exp(-mean), prod = uniform();
      uint64_t n = 0;
      while (prod > limit) {
        prod *= uniform();
        ++n;
      }
      return n;
    }
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      double u = uniform() - 0.5;
      double v = uniform();
      double us = 0.5 - std::fabs(u);
      double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<uint64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      double k = kf;
      double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
      double rhs = k * std::log(mean) - mean - std::lgamma(k + 1.0);
      if (lhs <= rhs) return static_cast<uint64_t>(kf);
    }
  }

private:
  void refill() {
    Philox4x32 p;
    p.key[0] = static_cast<uint32_t>(seed_);
    p.key[1] = static_cast<uint32_t>(seed_ >> 32);
    p.ctr[0] = static_cast<uint32_t>(pos_);
    p.ctr[1] = static_cast<uint32_t>(pos_ >> 32);
    p.ctr[2] = static_cast<uint32_t>(stream_);
    p.ctr[3] = static_cast<uint32_t>(stream_ >> 32);
    p.run10();
    for (int i = 0; i < 4; ++i) buf_[i] = p.ctr[i];
    buf_fill_ = 4;
    ++pos_;
  }

  uint64_t seed_;
  uint64_t stream_;
  uint64_t pos_;
  uint32_t buf_[4];
  int buf_fill_;
  bool have_normal_;
  double cached_normal_;
};

} // namespace spde
