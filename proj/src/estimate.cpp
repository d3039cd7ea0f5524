#include "spde/estimate.hpp"

#include <algorithm>
#include <cmath>

#include "spde/errors.hpp"
#include "spde/pool.hpp"
#include "spde/rng.hpp"
#include "spde/stats.hpp"

namespace spde {

FieldSeries SimConfig::run_replicate(SeedKey key, const SimOptions& opt) const {
  switch (model) {
    case ModelKind::Linear:
      return simulate_linear(op, kernel, measure, grid, key, opt);
    case ModelKind::Anderson:
      return simulate_anderson(op, kernel, measure, lambda, eta, grid, key, opt);
    case ModelKind::Nonlinear:
      return simulate_nonlinear(op, kernel, measure, sigma, drift, eta, grid, key, opt);
  }
  throw ConfigError("unknown model kind");
}

namespace {
// purpose tag separating bootstrap draws from simulation noise streams
constexpr uint64_t kBootstrapPurpose = 917504;
}

MomentReport mc_moments(const SimConfig& sim, const std::vector<double>& p_list,
                        const std::vector<double>& times, std::size_t replicates,
                        uint64_t seed, unsigned threads, std::size_t probe_stride,
                        std::size_t probe_offset, double blowup_threshold) {
  if (replicates < 2) throw ConfigError("mc_moments needs at least 2 replicates");
  if (p_list.empty() || times.empty()) throw ConfigError("empty p list or time list");
  for (double p : p_list)
    if (!std::isfinite(moment_mp(sim.measure, p)))
      throw MomentGateError("moment gate: m_p infinite for requested p");

  SimOptions opt;
  opt.record_times = times;
  opt.blowup_threshold = blowup_threshold;

  const std::size_t np = p_list.size(), nt = times.size();
  // per replicate, per (p,t): probe-averaged |u|^p; NaN marks an abort
  std::vector<std::vector<double>> rows(replicates,
                                        std::vector<double>(np * nt, 0.0));
  std::vector<char> ok(replicates, 1);

  parallel_for_index(replicates, threads, [&](std::size_t r) {
    SeedKey key{seed, r};
    FieldSeries fs;
    try {
      fs = sim.run_replicate(key, opt);
    } catch (const BlowUpError&) {
      ok[r] = 0;
      return;
    }
    for (std::size_t it = 0; it < nt; ++it) {
      const std::vector<double>& u = fs.at_time(times[it]);
      for (std::size_t ip = 0; ip < np; ++ip) {
        double p = p_list[ip];
        double acc = 0.0;
        std::size_t used = 0;
        for (std::size_t j = probe_offset; j < u.size(); j += probe_stride) {
          acc += std::pow(std::fabs(u[j]), p);
          ++used;
        }
        rows[r][ip * nt + it] = acc / static_cast<double>(used);
      }
    }
  });

  std::vector<std::size_t> valid;
  for (std::size_t r = 0; r < replicates; ++r)
    if (ok[r]) valid.push_back(r);
  if (valid.size() < 2) throw BlowUpError(0, "fewer than 2 replications survived");

  MomentReport rep;
  rep.times = times;
  rep.p_values = p_list;
  rep.replicates = valid.size();
  rep.aborted = replicates - valid.size();
  rep.abort_flag = rep.aborted * 100 > replicates;
  rep.probe_stride = probe_stride;
  rep.probe_offset = probe_offset;
  rep.estimates.assign(np, std::vector<double>(nt, 0.0));
  rep.stderrs.assign(np, std::vector<double>(nt, 0.0));
  rep.ess.assign(np, std::vector<double>(nt, 0.0));
  rep.ess_ok.assign(np, std::vector<bool>(nt, true));

  const int B = 500;
  std::vector<double> sample(valid.size());
  std::vector<double> boot(B);
  for (std::size_t ip = 0; ip < np; ++ip) {
    for (std::size_t it = 0; it < nt; ++it) {
      for (std::size_t v = 0; v < valid.size(); ++v)
        sample[v] = rows[valid[v]][ip * nt + it];
      rep.estimates[ip][it] = mean(sample);
      RngStream rng(seed, 0, kBootstrapPurpose, ip * nt + it);
      for (int b = 0; b < B; ++b) {
        double acc = 0.0;
        for (std::size_t v = 0; v < sample.size(); ++v) {
          auto pick = static_cast<std::size_t>(rng.uniform() * sample.size());
          if (pick >= sample.size()) pick = sample.size() - 1;
          acc += sample[pick];
        }
        boot[b] = acc / static_cast<double>(sample.size());
      }
      double bm = mean(boot);
      double ss = 0.0;
      for (double v : boot) ss += (v - bm) * (v - bm);
      rep.stderrs[ip][it] = std::sqrt(ss / (B - 1));
      double s1 = 0.0, s2 = 0.0;
      for (double v : sample) {
        s1 += v;
        s2 += v * v;
      }
      rep.ess[ip][it] = s2 > 0.0 ? s1 * s1 / s2 : 0.0;
      rep.ess_ok[ip][it] = rep.ess[ip][it] >= 30.0;
    }
  }
  return rep;
}

LyapunovEstimate lyapunov_estimate(const MomentReport& report, double p, double t_lo,
                                   double t_hi) {
  std::size_t ip = report.p_values.size();
  for (std::size_t i = 0; i < report.p_values.size(); ++i)
    if (report.p_values[i] == p) ip = i;
  if (ip == report.p_values.size()) throw ConfigError("p not present in the report");

  std::vector<double> ts, ys, sig;
  for (std::size_t it = 0; it < report.times.size(); ++it) {
    double t = report.times[it];
    if (t < t_lo || t > t_hi) continue;
    double est = report.estimates[ip][it];
    if (!(est > 0.0))
      throw ConfigError("nonpositive moment estimate inside the regression window");
    ts.push_back(t);
    ys.push_back(std::log(est));
    sig.push_back(report.stderrs[ip][it] / est);
  }
  if (ts.size() < 4) throw ConfigError("lyapunov window needs at least 4 time points");
  LineFit fit = least_squares(ts, ys, &sig);
  return {fit.slope, fit.slope_stderr};
}

CompareResult compare_bound(const MomentReport& report, double p,
                            const std::vector<std::pair<double, double>>& bound_series) {
  std::size_t ip = report.p_values.size();
  for (std::size_t i = 0; i < report.p_values.size(); ++i)
    if (report.p_values[i] == p) ip = i;
  if (ip == report.p_values.size()) throw ConfigError("p not present in the report");

  CompareResult out;
  out.all_pass = true;
  for (const auto& [t, bound] : bound_series) {
    std::size_t it = report.times.size();
    for (std::size_t i = 0; i < report.times.size(); ++i)
      if (std::fabs(report.times[i] - t) <= 1e-9 * std::max(1.0, std::fabs(t))) it = i;
    if (it == report.times.size())
      throw ConfigError("bound series time grid does not align with the report");
    BoundVerdict v;
    v.t = t;
    v.estimate = report.estimates[ip][it];
    v.stderr_ = report.stderrs[ip][it];
    v.bound = bound;
    v.pass = v.estimate <= bound + 3.0 * v.stderr_;
    out.all_pass = out.all_pass && v.pass;
    out.verdicts.push_back(v);
  }
  return out;
}

} // namespace spde
