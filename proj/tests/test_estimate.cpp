#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spde/config.hpp"
#include "spde/errors.hpp"
#include "spde/estimate.hpp"

using namespace spde;

namespace {

SimConfig linear_config(double T, double dt, std::size_t N) {
  SimConfig sc;
  sc.op = OperatorSpec::heat(1);
  sc.kernel = KernelSpec::heat(1.0, 1);
  sc.measure = LevyMeasureSpec::gamma(1.0, 1.0);
  sc.model = ModelKind::Linear;
  sc.grid.dim = 1;
  sc.grid.half_width = 6.0;
  sc.grid.points = N;
  sc.grid.time_step = dt;
  sc.grid.horizon = T;
  return sc;
}

} // namespace

TEST_CASE("synthetic exponential regression is exact") {
  MomentReport rep;
  rep.p_values = {2.0};
  double c = 0.8125;
  for (int i = 0; i < 10; ++i) {
    double t = 0.5 + 0.25 * i;
    rep.times.push_back(t);
  }
  rep.estimates.assign(1, {});
  rep.stderrs.assign(1, {});
  for (double t : rep.times) {
    rep.estimates[0].push_back(std::exp(c * t));
    rep.stderrs[0].push_back(0.0);
  }
  auto est = lyapunov_estimate(rep, 2.0, 0.4, 3.1);
  CHECK(std::fabs(est.slope - c) < 1e-10);
  CHECK(est.stderr_ < 1e-10);
}

TEST_CASE("degenerate anderson gives |eta|^p with zero stderr") {
  SimConfig sc = linear_config(0.25, 0.05, 32);
  sc.model = ModelKind::Anderson;
  sc.lambda = 0.0;
  sc.eta = -1.5;
  auto rep = mc_moments(sc, {2.0, 3.0}, {0.25}, 8, 77);
  CHECK(rep.estimates[0][0] == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(rep.estimates[1][0] == doctest::Approx(std::pow(1.5, 3.0)).epsilon(1e-12));
  CHECK(rep.stderrs[0][0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("linear p=2 estimate matches the isometry quadrature") {
  SimConfig sc = linear_config(0.5, 1.0 / 64.0, 128);
  auto rep = mc_moments(sc, {2.0}, {0.25, 0.5}, 800, 91);
  for (std::size_t it = 0; it < rep.times.size(); ++it) {
    double t = rep.times[it];
    double target = (std::sqrt(t + 0.5) - std::sqrt(0.5)) / std::sqrt(kPi);
    double bias = 0.35 * sc.grid.time_step * target;
    CHECK(std::fabs(rep.estimates[0][it] - target) < 3.0 * rep.stderrs[0][it] + 3.0 * bias);
  }
}

TEST_CASE("stderr shrinks like the square root of the replicate count") {
  SimConfig sc = linear_config(0.25, 0.025, 64);
  auto r1 = mc_moments(sc, {2.0}, {0.25}, 700, 5);
  auto r2 = mc_moments(sc, {2.0}, {0.25}, 1400, 5);
  double ratio = r1.stderrs[0][0] / r2.stderrs[0][0];
  CHECK(ratio > std::sqrt(2.0) * 0.85);
  CHECK(ratio < std::sqrt(2.0) * 1.15);
}

TEST_CASE("thread count changes nothing") {
  SimConfig sc = linear_config(0.25, 0.025, 64);
  auto a = mc_moments(sc, {2.0, 4.0}, {0.125, 0.25}, 64, 13, 1);
  auto b = mc_moments(sc, {2.0, 4.0}, {0.125, 0.25}, 64, 13, 4);
  for (std::size_t ip = 0; ip < a.p_values.size(); ++ip)
    for (std::size_t it = 0; it < a.times.size(); ++it) {
      CHECK(a.estimates[ip][it] == b.estimates[ip][it]);
      CHECK(a.stderrs[ip][it] == b.stderrs[ip][it]);
    }
}

TEST_CASE("compare_bound harness") {
  SimConfig sc = linear_config(0.25, 0.05, 32);
  auto rep = mc_moments(sc, {2.0}, {0.25}, 512, 3);
  SUBCASE("infinite bound always passes") {
    auto res = compare_bound(rep, 2.0,
                             {{0.25, std::numeric_limits<double>::infinity()}});
    CHECK(res.all_pass);
  }
  SUBCASE("zero bound with a nonzero estimate fails") {
    auto res = compare_bound(rep, 2.0, {{0.25, 0.0}});
    CHECK_FALSE(res.all_pass);
  }
  SUBCASE("misaligned grids are rejected") {
    CHECK_THROWS_AS(compare_bound(rep, 2.0, {{0.33, 1.0}}), ConfigError);
  }
}

TEST_CASE("moment gate and window validation") {
  SimConfig sc = linear_config(0.25, 0.05, 32);
  sc.measure = LevyMeasureSpec::truncated_stable(1.5, 1.0, 1e-3);
  CHECK_THROWS_AS(mc_moments(sc, {1.0}, {0.25}, 8, 1), MomentGateError);

  sc.measure = LevyMeasureSpec::gamma(1.0, 1.0);
  auto rep = mc_moments(sc, {2.0}, {0.05, 0.1, 0.15, 0.2, 0.25}, 16, 1);
  CHECK_THROWS_AS(lyapunov_estimate(rep, 2.0, 0.2, 0.25), ConfigError); // < 4 points
  CHECK_THROWS_AS(lyapunov_estimate(rep, 3.0, 0.0, 0.25), ConfigError); // p missing
}

TEST_CASE("probe offset invariance under stationarity") {
  SimConfig sc = linear_config(0.5, 0.025, 128);
  auto a = mc_moments(sc, {2.0}, {0.5}, 600, 21, 2, 4, 0);
  auto b = mc_moments(sc, {2.0}, {0.5}, 600, 21, 2, 4, 2);
  double gap = std::fabs(a.estimates[0][0] - b.estimates[0][0]);
  double se = std::hypot(a.stderrs[0][0], b.stderrs[0][0]);
  CHECK(gap < 3.0 * se);
}

TEST_CASE("mc moments stay below the linear p-moment bound") {
  // one-sided domination with the default B_p, heat + heat kernel, p = 4
  SimConfig sc = linear_config(0.5, 1.0 / 64.0, 128);
  std::vector<double> times{0.25, 0.5};
  auto rep = mc_moments(sc, {2.0, 4.0}, times, 600, 11, 2);
  for (double p : {2.0, 4.0}) {
    std::vector<std::pair<double, double>> bounds;
    for (double t : times)
      bounds.push_back({t, linear_moment_bound(sc.op, sc.kernel, sc.measure, p, t,
                                               default_rosenthal_Bp(p))});
    auto res = compare_bound(rep, p, bounds);
    CHECK(res.all_pass);
  }
}

TEST_CASE("estimator z-scores behave across repeated harness runs") {
  // |z| < 3 must hold in at least 11 of 12 independent harness runs
  SimConfig sc = linear_config(0.25, 1.0 / 64.0, 64);
  double target = (std::sqrt(0.25 + 0.5) - std::sqrt(0.5)) / std::sqrt(kPi);
  int ok = 0;
  for (uint64_t run = 0; run < 12; ++run) {
    auto rep = mc_moments(sc, {2.0}, {0.25}, 300, 1000 + run, 2);
    double z = (rep.estimates[0][0] - target) / rep.stderrs[0][0];
    if (std::fabs(z) < 3.0) ++ok;
  }
  CHECK(ok >= 11);
}

TEST_CASE("ess diagnostic is reported") {
  SimConfig sc = linear_config(0.25, 0.025, 64);
  auto rep = mc_moments(sc, {2.0}, {0.25}, 128, 7);
  CHECK(rep.ess[0][0] > 30.0);
  CHECK(rep.ess_ok[0][0]);
}

TEST_CASE("aborted replications are excluded and flagged") {
  SimConfig sc = linear_config(0.25, 0.025, 64);
  sc.model = ModelKind::Anderson;
  sc.lambda = 1.0;
  sc.eta = 1.0;
  // a threshold barely above eta aborts the replicates whose noise pushes
  // |u| over it while the quiet ones survive
  auto rep = mc_moments(sc, {2.0}, {0.25}, 64, 23, 2, 4, 0, 1.4);
  CHECK(rep.aborted > 0);
  CHECK(rep.replicates + rep.aborted == 64);
  CHECK(rep.abort_flag == (rep.aborted * 100 > 64));
}

TEST_CASE("named scalar function registry") {
  CHECK(named_scalar_func("identity", 1.0).fn(2.0) == doctest::Approx(2.0));
  CHECK(named_scalar_func("scaled-linear", 3.0).fn(2.0) == doctest::Approx(6.0));
  CHECK(named_scalar_func("affine-clip", 2.0).fn(5.0) == doctest::Approx(1.0));
  CHECK(named_scalar_func("sin-bounded", 2.0).fn(kPi / 2.0) == doctest::Approx(2.0));
  CHECK(named_scalar_func("sin-bounded", 2.0).lipschitz == doctest::Approx(2.0));
  CHECK_THROWS_AS(named_scalar_func("cubic", 1.0), ConfigError);
}
