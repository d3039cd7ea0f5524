#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spde/errors.hpp"
#include "spde/green.hpp"
#include "spde/quad.hpp"
#include "spde/rng.hpp"

using namespace spde;

namespace {
std::array<double, kMaxDim> pt(double x, double y = 0.0, double z = 0.0) {
  return {x, y, z};
}
} // namespace

TEST_CASE("green function closed forms") {
  auto heat1 = OperatorSpec::heat(1);
  CHECK(green_value(heat1, 1.0, pt(0.0)) ==
        doctest::Approx(1.0 / std::sqrt(kTwoPi)).epsilon(1e-13));

  auto wave1 = OperatorSpec::wave(1);
  CHECK(green_value(wave1, 2.0, pt(1.5)) == doctest::Approx(0.5));
  CHECK(green_value(wave1, 2.0, pt(2.5)) == doctest::Approx(0.0));

  auto wave2 = OperatorSpec::wave(2);
  CHECK(green_value(wave2, 1.0, pt(0.0, 0.0)) ==
        doctest::Approx(1.0 / kTwoPi).epsilon(1e-13));
  CHECK(std::isinf(green_value(wave2, 1.0, pt(1.0, 0.0)))); // light cone

  auto wave3 = OperatorSpec::wave(3);
  CHECK_THROWS_AS(green_value(wave3, 1.0, pt(0.1, 0.1, 0.1)), UnsupportedError);
}

TEST_CASE("green fourier transforms") {
  auto heat1 = OperatorSpec::heat(1);
  CHECK(green_fourier(heat1, 0.0, 3.7) == doctest::Approx(1.0));
  CHECK(green_fourier(heat1, 1.0, 1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-13));

  auto wave2 = OperatorSpec::wave(2);
  CHECK(green_fourier(wave2, kPi, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(green_fourier(wave2, 0.7, 0.0) == doctest::Approx(0.7));
  CHECK(green_fourier(wave2, 0.7, 1e-10) == doctest::Approx(0.7).epsilon(1e-12));

  // 0 <= (F G_t)^2 <= t^2 pointwise
  RngStream rng(5, 0);
  for (int i = 0; i < 300; ++i) {
    double t = 3.0 * rng.uniform(), r = 10.0 * rng.uniform();
    double g = green_fourier(wave2, t, r);
    CHECK(g * g <= t * t * (1.0 + 1e-12));
    CHECK(g * g >= 0.0);
  }
}

TEST_CASE("laplace transform of the squared green transform") {
  auto heat = OperatorSpec::heat(2);
  auto wave = OperatorSpec::wave(2);
  CHECK(laplace_green_sq(heat, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK(laplace_green_sq(wave, 2.0, 0.0) == doctest::Approx(0.25));

  // quadrature oracle at 20 random points, |closed - numeric| < 1e-8;
  // integrate chunk by chunk so the oscillations stay resolved
  RngStream rng(9, 0);
  for (int i = 0; i < 20; ++i) {
    double beta = 0.2 + 3.0 * rng.uniform();
    double r = 4.0 * rng.uniform();
    for (auto* op : {&heat, &wave}) {
      auto integrand = [&](double t) {
        double g = green_fourier(*op, t, r);
        return std::exp(-beta * t) * g * g;
      };
      double numeric = 0.0;
      double T = 80.0 / beta;
      double chunk = std::min(1.0, kPi / (2.0 * std::max(r, 0.5)));
      for (double lo = 0.0; lo < T; lo += chunk)
        numeric += integrate(integrand, lo, std::min(lo + chunk, T), 1e-12, 20);
      CHECK(std::fabs(numeric - laplace_green_sq(*op, beta, r)) < 1e-8);
    }
  }
}

TEST_CASE("heat semigroup on the grid") {
  auto heat = OperatorSpec::heat(1);
  const std::size_t N = 4096;
  const double L = 16.0, dx = 2.0 * L / N;
  double t1 = 0.4, t2 = 0.9;
  for (double x0 : {0.0, 0.8}) {
    double conv = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      double y = -L + static_cast<double>(j) * dx;
      if (std::fabs(x0 - y) > L) continue;
      conv += green_value(heat, t1, pt(y)) * green_value(heat, t2, pt(x0 - y)) * dx;
    }
    CHECK(conv == doctest::Approx(green_value(heat, t1 + t2, pt(x0))).epsilon(1e-6));
  }
}

TEST_CASE("plancherel for the heat green function, d=1") {
  auto heat = OperatorSpec::heat(1);
  for (double t : {0.1, 1.0}) {
    const std::size_t N = 8192;
    const double L = 20.0, dx = 2.0 * L / N, dxi = kPi / L;
    double lhs = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      double x = -L + static_cast<double>(j) * dx;
      double g = green_value(heat, t, pt(x));
      lhs += g * g * dx;
    }
    double rhs = 0.0;
    for (std::size_t m = 0; m < N; ++m) {
      double xi = (static_cast<double>(m) - N / 2.0) * dxi;
      double g = green_fourier(heat, t, std::fabs(xi));
      rhs += g * g * dxi / kTwoPi;
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
  }
}

TEST_CASE("green mass used by the drift quadrature") {
  CHECK(green_mass(OperatorSpec::heat(2), 0.7) == doctest::Approx(1.0));
  CHECK(green_mass(OperatorSpec::wave(1), 0.7) == doctest::Approx(0.7));
}
