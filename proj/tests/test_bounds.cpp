#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spde/bounds.hpp"
#include "spde/errors.hpp"
#include "spde/quad.hpp"
#include "spde/stats.hpp"

using namespace spde;

namespace {

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return out;
}

// closed form for the heat operator + heat kernel: J_2(t) = (2 pi)^{-d}
// (pi / (t + alpha/2))^{d/2}
double j2_heat_heat(int d, double alpha, double t) {
  return std::pow(kTwoPi, -d) * std::pow(kPi / (t + 0.5 * alpha), 0.5 * d);
}

// closed form for J_4 with d=1, alpha: G_t * kappa is the gaussian of
// variance parameter t + alpha/2
double j4_heat_heat_1d(double alpha, double t) {
  double a = t + 0.5 * alpha;
  return std::pow(kTwoPi * a, -1.0) * std::pow(kPi * a / 2.0, 0.25);
}

} // namespace

TEST_CASE("j2 golden values and the quadrature oracle") {
  auto op = OperatorSpec::heat(1);
  auto kernel = KernelSpec::heat(1.0, 1);
  double t = 0.5;
  double golden = std::sqrt(kPi) / kTwoPi; // (2 pi)^-1 sqrt(pi / 1)
  CHECK(j2_spectral(op, kernel, t) == doctest::Approx(golden).epsilon(1e-9));
  CHECK(j2_heat_heat(1, 1.0, t) == doctest::Approx(golden).epsilon(1e-14));
  CHECK(j_p_numeric(op, kernel, t, 2.0) == doctest::Approx(golden).epsilon(1e-9));
}

TEST_CASE("product of two 1-d heat factors equals the isotropic 2-d kernel") {
  auto op = OperatorSpec::heat(2);
  auto iso = KernelSpec::heat(1.0, 2);
  auto prod = KernelSpec::product({KernelSpec::heat(1.0, 1), KernelSpec::heat(1.0, 1)});
  double a = j2_spectral(op, iso, 0.5);
  double b = j2_spectral(op, prod, 0.5);
  CHECK(a == doctest::Approx(j2_heat_heat(2, 1.0, 0.5)).epsilon(1e-9));
  CHECK(b == doctest::Approx(a).epsilon(1e-5));
}

TEST_CASE("j_p grid route against the gaussian closed form, p = 4") {
  auto op = OperatorSpec::heat(1);
  auto kernel = KernelSpec::heat(1.0, 1);
  for (double t : {0.25, 1.0}) {
    double expected = j4_heat_heat_1d(1.0, t);
    CHECK(j_p_numeric(op, kernel, t, 4.0) == doctest::Approx(expected).epsilon(1e-7));
  }
}

TEST_CASE("riesz self-similarity: exact log-log slopes") {
  auto op = OperatorSpec::heat(1);
  auto kernel = KernelSpec::riesz(0.5, 1);
  auto ts = log_spaced(0.01, 1.0, 12);
  for (double p : {2.0, 4.0}) {
    std::vector<double> lx, ly;
    for (double t : ts) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(j_p_numeric(op, kernel, t, p)));
    }
    LineFit fit = least_squares(lx, ly);
    double expected = 1.0 * (1.0 / p + 0.5 / 2.0 - 1.0);
    CHECK(std::fabs(fit.slope - expected) < 0.02);
    CHECK(fit.slope_stderr < 0.02);
  }
}

TEST_CASE("wave + riesz self-similarity: slope 2/p + alpha") {
  auto op = OperatorSpec::wave(1);
  auto kernel = KernelSpec::riesz(0.5, 1);
  for (double p : {2.0, 4.0}) {
    std::vector<double> lx, ly;
    for (double t : log_spaced(0.05, 2.0, 10)) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(j_p_numeric(op, kernel, t, p)));
    }
    LineFit fit = least_squares(lx, ly);
    CHECK(std::fabs(fit.slope - (2.0 / p + 0.5)) < 0.02);
  }
}

TEST_CASE("chaos n=1 term matches quadrature for every sampler family") {
  auto measure = LevyMeasureSpec::gamma(1.0, 1.0);
  const double lambda = 0.3, eta = 1.0, t = 0.5;
  struct Case {
    OperatorSpec op;
    KernelSpec kernel;
  };
  std::vector<Case> cases{
      {OperatorSpec::heat(1), KernelSpec::heat(1.0, 1)},
      {OperatorSpec::wave(1), KernelSpec::heat(1.0, 1)},
      {OperatorSpec::heat(1), KernelSpec::riesz(0.5, 1)},
      {OperatorSpec::heat(1), KernelSpec::bessel(1.0, 1)},
      {OperatorSpec::heat(2), KernelSpec::poisson(1.0, 2)},
      {OperatorSpec::heat(2), KernelSpec::riesz(1.0, 2)},
      {OperatorSpec::wave(2), KernelSpec::heat(1.0, 2)},
      {OperatorSpec::heat(2),
       KernelSpec::product({KernelSpec::heat(1.0, 1), KernelSpec::heat(1.0, 1)})},
  };
  for (const auto& c : cases) {
    auto res = anderson_second_moment(c.op, c.kernel, measure, lambda, eta, t, 1, 150000,
                                      808);
    // target: m2 lambda^2 eta^2 int_0^t J_2(s) ds; the truncated samplers
    // drop a Dalang-weighted mass below 1e-3, allow for it
    double target = moment_m2(measure) * lambda * lambda * eta * eta *
                    m_p(c.op, c.kernel, t, 2.0).value;
    double tol = 4.0 * res.terms[1].mc_stderr + 3e-3 * target;
    CHECK(std::fabs(res.terms[1].value - target) < tol);
  }
}

TEST_CASE("j_p_bound branches") {
  SUBCASE("heat kernel branch is explicit and dominates j_p_numeric") {
    auto op = OperatorSpec::heat(1);
    auto kernel = KernelSpec::heat(1.0, 1);
    for (double p : {2.0, 4.0}) {
      JpBound b = j_p_bound(op, kernel, 1.0, p);
      CHECK(b.explicit_value);
      CHECK(b.exponent == doctest::Approx(0.0));
      for (double t : {0.05, 0.2, 1.0, 4.0}) {
        JpBound bt = j_p_bound(op, kernel, t, p);
        double jp = j_p_numeric(op, kernel, t, p);
        CHECK(jp <= bt.value * (1.0 + 1e-6));
      }
    }
    // p = 2 the bound is the identity J_2' = J_2
    JpBound b2 = j_p_bound(op, kernel, 0.7, 2.0);
    CHECK(b2.value == doctest::Approx(j2_heat_heat(1, 1.0, 0.7)).epsilon(1e-12));
  }
  SUBCASE("riesz and bessel exponents") {
    // d (1/p + alpha/(2d) - 1) = 1/4 + 1/4 - 1 = -1/2 for d=1, alpha=0.5, p=4
    CHECK(j_p_bound(OperatorSpec::heat(1), KernelSpec::riesz(0.5, 1), 1.0, 4.0).exponent ==
          doctest::Approx(-0.5));
    CHECK(j_p_bound(OperatorSpec::heat(1), KernelSpec::riesz(0.5, 1), 1.0, 2.0).exponent ==
          doctest::Approx(-0.25));
    CHECK(j_p_bound(OperatorSpec::wave(1), KernelSpec::riesz(0.5, 1), 1.0, 4.0).exponent ==
          doctest::Approx(2.0 / 4.0 + 0.5));
    CHECK(j_p_bound(OperatorSpec::wave(1), KernelSpec::bessel(1.0, 1), 1.0, 4.0).exponent ==
          doctest::Approx(0.5));
    CHECK_FALSE(j_p_bound(OperatorSpec::wave(1), KernelSpec::riesz(0.5, 1), 1.0, 4.0)
                    .explicit_value);
  }
  SUBCASE("uncovered pairs are rejected") {
    CHECK_THROWS_AS(j_p_bound(OperatorSpec::wave(2), KernelSpec::bessel(1.0, 2), 1.0, 4.0),
                    UnsupportedError);
    CHECK_THROWS_AS(j_p_bound(OperatorSpec::wave(3), KernelSpec::riesz(1.5, 3), 1.0, 4.0),
                    UnsupportedError);
    CHECK_THROWS_AS(j_p_bound(OperatorSpec::heat(1), KernelSpec::poisson(1.0, 1), 1.0, 4.0),
                    UnsupportedError);
    CHECK_THROWS_AS(j_p_bound(OperatorSpec::wave(2), KernelSpec::riesz(1.0, 2), 1.0, 6.0),
                    UnsupportedError); // needs p < 4/(2-alpha) = 4
  }
}

TEST_CASE("wave heat-kernel bound exponent 2") {
  JpBound b = j_p_bound(OperatorSpec::wave(1), KernelSpec::heat(1.0, 1), 0.5, 4.0);
  CHECK(b.explicit_value);
  CHECK(b.exponent == doctest::Approx(2.0));
  CHECK(j_p_numeric(OperatorSpec::wave(1), KernelSpec::heat(1.0, 1), 0.5, 4.0) <=
        b.value * (1.0 + 1e-6));
}

TEST_CASE("m_p time quadrature") {
  auto op = OperatorSpec::heat(1);
  auto kernel = KernelSpec::heat(1.0, 1);
  SUBCASE("t = 0 gives zero") {
    MpResult r = m_p(op, kernel, 0.0, 2.0);
    CHECK(r.value == 0.0);
    CHECK_FALSE(r.diverged);
  }
  SUBCASE("closed-form gaussian time integral at p = 2") {
    // int_0^t (2 pi)^-1 sqrt(pi/(s + 1/2)) ds = (sqrt(t+1/2) - sqrt(1/2)) / sqrt(pi)
    for (double t : {0.25, 1.0, 2.0}) {
      double expected = (std::sqrt(t + 0.5) - std::sqrt(0.5)) / std::sqrt(kPi);
      MpResult r = m_p(op, kernel, t, 2.0);
      CHECK_FALSE(r.diverged);
      CHECK(r.value == doctest::Approx(expected).epsilon(1e-7));
    }
  }
  SUBCASE("heat + riesz slope within the admissible range") {
    // alpha = 0.75, p = 4: exponent d(1-p)/2 + alpha p/4 + 1 = 0.25, and
    // p = 4 < (2d+4)/(2d-alpha) = 4.8
    auto riesz = KernelSpec::riesz(0.75, 1);
    GridResolution res;
    res.points = 1024;
    std::vector<double> lx, ly;
    for (double t : log_spaced(0.05, 1.0, 8)) {
      MpResult r = m_p(op, riesz, t, 4.0, res);
      REQUIRE_FALSE(r.diverged);
      lx.push_back(std::log(t));
      ly.push_back(std::log(r.value));
    }
    LineFit fit = least_squares(lx, ly);
    CHECK(std::fabs(fit.slope - 0.25) < 0.05);
  }
  SUBCASE("divergence flags mirror the admissible p ranges") {
    CHECK(m_p(op, KernelSpec::riesz(0.5, 1), 1.0, 4.0).diverged); // needs p < 4
    CHECK(m_p(op, KernelSpec::bessel(1.0, 1), 1.0, 4.0).diverged); // needs p < 3
    CHECK_FALSE(m_p(op, KernelSpec::bessel(1.0, 1), 1.0, 2.0).diverged);
  }
  SUBCASE("wave operator growth against the green norm bounds") {
    GridResolution res;
    res.points = 1024;
    auto wave = OperatorSpec::wave(1);
    // wave + riesz d=1 is self-similar: M_p ~ t^{alpha p/2 + 2} exactly
    {
      std::vector<double> lx, ly;
      for (double t : log_spaced(0.1, 1.0, 6)) {
        MpResult r = m_p(wave, KernelSpec::riesz(0.5, 1), t, 4.0, res);
        REQUIRE_FALSE(r.diverged);
        lx.push_back(std::log(t));
        ly.push_back(std::log(r.value));
      }
      LineFit fit = least_squares(lx, ly);
      CHECK(std::fabs(fit.slope - 3.0) < 0.1);
    }
    // wave + bessel d=1: the t^2 envelope dominates but is not sharp at
    // small t, so check one-sided domination with the constant from t = 1
    {
      auto bessel = KernelSpec::bessel(1.0, 1);
      double c1 = m_p(wave, bessel, 1.0, 4.0, res).value;
      for (double t : log_spaced(0.1, 1.0, 6)) {
        MpResult r = m_p(wave, bessel, t, 4.0, res);
        REQUIRE_FALSE(r.diverged);
        CHECK(r.value <= 1.05 * c1 * t * t);
      }
    }
  }
}

TEST_CASE("linear moment bound") {
  auto op = OperatorSpec::heat(1);
  auto kernel = KernelSpec::heat(1.0, 1);
  auto measure = LevyMeasureSpec::gamma(1.0, 1.0);
  SUBCASE("p = 2 with B_2 = 1 dominates the exact second moment") {
    double t = 0.5;
    double M2 = m_p(op, kernel, t, 2.0).value;
    double bound = linear_moment_bound(op, kernel, measure, 2.0, t, 1.0);
    CHECK(bound == doctest::Approx(4.0 * M2).epsilon(1e-9)); // 2 m2 (M2 + M2)
    CHECK(bound >= 1.0 * M2);                                // exact E|v|^2 = m2 M2
  }
  SUBCASE("heat-kernel bound grows at most like M_2^{p/2} ~ t^{p/4} in d=1") {
    // J_p' decays like t^{-d/2}, so in d=1 the M_2^{p/2} term still grows;
    // the growth is polynomial of degree p/4, never exponential
    double b1 = linear_moment_bound(op, kernel, measure, 4.0, 4.0, 1.0);
    double b2 = linear_moment_bound(op, kernel, measure, 4.0, 8.0, 1.0);
    CHECK(b2 > b1);
    CHECK(b2 <= b1 * std::pow(2.0, 4.0 / 4.0) * 1.2);
  }
  SUBCASE("moment gate") {
    auto ts = LevyMeasureSpec::truncated_stable(1.5, 1.0);
    CHECK(std::isinf(moment_mp(ts, 1.4))); // below the stable index
    CHECK_THROWS_AS(linear_moment_bound(op, kernel, ts, 1.4, 0.5, 1.0), ConfigError);
  }
}

TEST_CASE("a_beta_p behavior") {
  auto op = OperatorSpec::heat(1);
  auto kernel = KernelSpec::heat(1.0, 1);
  SUBCASE("nonincreasing in beta and vanishing at infinity") {
    double prev = 1e300;
    for (double beta : {0.01, 0.1, 1.0, 10.0, 1e3}) {
      double v = a_beta_p(op, kernel, beta, 2.0).value;
      CHECK(v < prev);
      prev = v;
    }
    CHECK(a_beta_p(op, kernel, 1e5, 2.0).value < 1e-4);
  }
  SUBCASE("small-beta growth dominated by the beta^{-p/2} + beta^{-1} shape") {
    // the proven estimate is one-sided; calibrate its constant at the
    // largest beta of the ladder and check domination below it, plus the
    // fitted slope never drops under the -p/2 envelope rate
    for (double p : {2.0, 4.0}) {
      auto shape = [&](double beta) {
        return std::pow(beta, -0.5 * p) + 1.0 / beta;
      };
      double c0 = a_beta_p(op, kernel, 1e-2, p).value / shape(1e-2);
      std::vector<double> lx, ly;
      for (double beta : log_spaced(1e-4, 1e-2, 6)) {
        double v = a_beta_p(op, kernel, beta, p).value;
        CHECK(v <= 1.5 * c0 * shape(beta));
        lx.push_back(std::log(beta));
        ly.push_back(std::log(v));
      }
      LineFit fit = least_squares(lx, ly);
      CHECK(fit.slope >= -0.5 * p - 0.1);
      CHECK(fit.slope <= 0.0);
    }
  }
}

TEST_CASE("a_beta_p at p=2 matches the fubini closed form") {
  // int_0^inf e^{-2 beta t} J_2(t) dt = int I_{2 beta}(xi) mu(dxi), with the
  // closed-form Laplace transform of |F G_t|^2 on the inside
  auto kernel = KernelSpec::heat(1.0, 1);
  for (double beta : {0.3, 1.0, 4.0}) {
    for (OperatorKind kind : {OperatorKind::Heat, OperatorKind::Wave}) {
      OperatorSpec op = kind == OperatorKind::Heat ? OperatorSpec::heat(1)
                                                   : OperatorSpec::wave(1);
      auto inner = [&](double r) {
        return laplace_green_sq(op, 2.0 * beta, r) * std::exp(-0.5 * r * r);
      };
      double oracle = 2.0 * integrate(inner, 0.0, 30.0, 1e-12) / kTwoPi;
      double got = a_beta_p(op, kernel, beta, 2.0).value;
      CHECK(got == doctest::Approx(2.0 * oracle).epsilon(1e-6));
    }
  }
}

TEST_CASE("beta_star bisection") {
  auto op = OperatorSpec::heat(1);
  auto kernel = KernelSpec::heat(1.0, 1);
  auto measure = LevyMeasureSpec::gamma(1.0, 1.0);
  SUBCASE("zero lipschitz constant gives zero") {
    BetaStarResult r = beta_star(op, kernel, measure, 2.0, 0.0, 1.0);
    CHECK(r.value == 0.0);
  }
  SUBCASE("nondecreasing in the lipschitz constant") {
    double prev = 0.0;
    for (double lip : {0.5, 1.0, 2.0, 4.0}) {
      BetaStarResult r = beta_star(op, kernel, measure, 2.0, lip, 1.0);
      CHECK(std::isfinite(r.value));
      CHECK(r.value >= prev);
      prev = r.value;
    }
  }
  SUBCASE("bisection agrees with a dense scan near the threshold") {
    BetaStarResult r = beta_star(op, kernel, measure, 2.0, 1.0, 1.0);
    REQUIRE(std::isfinite(r.value));
    double m2 = moment_m2(measure);
    double cp = rosenthal_constant(2.0, m2, moment_mp(measure, 2.0), 1.0);
    auto holds = [&](double beta) {
      return 1.0 * cp * a_beta_p(op, kernel, beta, 2.0).value < 1.0;
    };
    // scan a +-1% bracket in 1e-4 absolute steps: the predicate must flip
    // within one step of the bisection result
    double flip = -1.0;
    for (double beta = r.value * 0.99; beta <= r.value * 1.01; beta += 1e-4) {
      if (holds(beta)) {
        flip = beta;
        break;
      }
    }
    REQUIRE(flip > 0.0);
    CHECK(std::fabs(flip - r.value) <= 2e-4);
  }
}

TEST_CASE("upsilon boxed spectral integral") {
  // antiderivative oracle: (2 pi)^-1 int_1^2 xi^{-alpha-2} dxi with a valid
  // 1-d riesz order alpha = 0.5
  auto riesz = KernelSpec::riesz(0.5, 1);
  std::array<double, kMaxDim> a{{1.0, 0.0, 0.0}};
  double oracle = (1.0 - std::pow(2.0, -1.5)) / 1.5 / kTwoPi;
  CHECK(upsilon(riesz, a, 0.0) == doctest::Approx(oracle).epsilon(1e-10));
  double prev = 1e300;
  for (double beta : {0.0, 0.5, 2.0, 10.0, 1e4}) {
    double v = upsilon(riesz, a, beta);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(upsilon(riesz, a, 1e8) < 1e-8);
}

TEST_CASE("intermittency witness search") {
  auto measure = LevyMeasureSpec::gamma(1.0, 1.0); // m2 = 1
  SUBCASE("heat d=1 heat kernel with a large lower bound") {
    auto r = intermittency_check(OperatorSpec::heat(1), KernelSpec::heat(1.0, 1), measure,
                                 100.0);
    CHECK(r.intermittent_lb);
    REQUIRE(r.witness_beta.has_value());
    CHECK(*r.witness_beta > 0.0);
  }
  SUBCASE("wave d=1 riesz: any positive lower bound works") {
    auto r = intermittency_check(OperatorSpec::wave(1), KernelSpec::riesz(0.5, 1), measure,
                                 0.05);
    CHECK(r.intermittent_lb);
    REQUIRE(r.witness_beta.has_value());
    CHECK(*r.witness_beta > 0.0);
  }
  SUBCASE("heat d=2 with a tiny lower bound is inconclusive") {
    auto r = intermittency_check(OperatorSpec::heat(2), KernelSpec::heat(1.0, 2), measure,
                                 0.05);
    CHECK_FALSE(r.intermittent_lb);
    CHECK_FALSE(r.witness_beta.has_value());
  }
}

TEST_CASE("anderson chaos series") {
  auto op = OperatorSpec::heat(1);
  auto kernel = KernelSpec::heat(1.0, 1);
  auto measure = LevyMeasureSpec::gamma(1.0, 1.0);
  double lambda = 0.2, eta = 1.0, t = 0.5;
  auto res = anderson_second_moment(op, kernel, measure, lambda, eta, t, 3, 200000, 2024);

  REQUIRE(res.terms.size() == 4);
  CHECK(res.terms[0].value == eta * eta);
  CHECK(res.terms[0].mc_stderr == 0.0);
  for (const auto& term : res.terms) CHECK(term.value >= 0.0);

  // n = 1 equals m2 lambda^2 eta^2 int_0^t J_2(s) ds (closed form oracle)
  double target = moment_m2(measure) * lambda * lambda * eta * eta *
                  (std::sqrt(t + 0.5) - std::sqrt(0.5)) / std::sqrt(kPi);
  CHECK(std::fabs(res.terms[1].value - target) <
        4.0 * res.terms[1].mc_stderr + 1e-6 * target);

  // geometric decay: term ratio below m2 lambda^2 int_0^t J_2 with MC slack
  double geo = moment_m2(measure) * lambda * lambda *
               (std::sqrt(t + 0.5) - std::sqrt(0.5)) / std::sqrt(kPi);
  for (std::size_t n = 2; n < res.terms.size(); ++n) {
    double prev = res.terms[n - 1].value;
    double slack = 5.0 * res.terms[n].mc_stderr + 5.0 * res.terms[n - 1].mc_stderr * geo;
    CHECK(res.terms[n].value <= prev * geo + slack);
  }

  // partial sums nondecreasing in n_max follows from nonnegative terms
  double psum = 0.0;
  for (const auto& term : res.terms) {
    CHECK(psum <= res.partial_sum + 1e-15);
    psum += term.value;
  }
  CHECK(psum == doctest::Approx(res.partial_sum));
}

TEST_CASE("lyapunov exact formulas") {
  // heat, d=1, alpha=0.5 (alpha'=0.5), normalized inputs
  CHECK(lyapunov_exact(OperatorKind::Heat, 1, 0.5, 1.0, 1.0, 1.0) == doctest::Approx(1.0));
  // doubling lambda scales the heat value by 2^{2/(2-alpha')}
  double v1 = lyapunov_exact(OperatorKind::Heat, 1, 0.5, 1.0, 2.0, 3.0);
  double v2 = lyapunov_exact(OperatorKind::Heat, 1, 0.5, 2.0, 2.0, 3.0);
  CHECK(v2 / v1 == doctest::Approx(std::pow(2.0, 2.0 / 1.5)).epsilon(1e-12));
  // continuity in lambda at 0: positive exponent sends the value to 0
  CHECK(lyapunov_exact(OperatorKind::Heat, 1, 0.5, 1e-8, 1.0, 1.0) < 1e-5);
  // wave formula
  double w = lyapunov_exact(OperatorKind::Wave, 1, 0.5, 1.0, 1.0, 1.0);
  CHECK(w == doctest::Approx(std::pow(std::pow(2.0, 0.5), 1.0 / 2.5)).epsilon(1e-12));
  // formula domain
  CHECK_THROWS_AS(lyapunov_exact(OperatorKind::Heat, 3, 0.5, 1.0, 1.0, 1.0), ConfigError);
}

TEST_CASE("negative control: dalang failure shows up as spectral divergence") {
  auto op = OperatorSpec::wave(3);
  auto kernel = KernelSpec::riesz(0.5, 3); // alpha <= d-2, Dalang fails
  CHECK_FALSE(dalang_condition(kernel).holds);
  GridResolution r1, r2, r3;
  r1.freq_cutoff = 1e2;
  r2.freq_cutoff = 1e4;
  r3.freq_cutoff = 1e6;
  double v1 = j_p_numeric(op, kernel, 1.0, 2.0, r1);
  double v2 = j_p_numeric(op, kernel, 1.0, 2.0, r2);
  double v3 = j_p_numeric(op, kernel, 1.0, 2.0, r3);
  CHECK(v2 > 2.0 * v1);
  CHECK(v3 > 2.0 * v2);
  CHECK_THROWS_AS(j_p_numeric(op, kernel, 1.0, 2.0), DalangError);
  CHECK_THROWS_AS(j_p_numeric(OperatorSpec::heat(3), KernelSpec::riesz(0.5, 3), 1.0, 4.0),
                  DalangError);
}
