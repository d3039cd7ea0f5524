#include "spde/config.hpp"

#include <cmath>
#include <fstream>

#include "spde/errors.hpp"

namespace spde {

using nlohmann::json;

ScalarFunc named_scalar_func(const std::string& name, double scale) {
  if (name == "zero") return ScalarFunc::zero();
  if (name == "one") return ScalarFunc::one();
  if (name == "identity") return {[](double u) { return u; }, 1.0, "identity"};
  if (name == "scaled-linear") return ScalarFunc::scaled_linear(scale);
  if (name == "affine-clip") {
    double s = scale;
    return {[s](double u) { return std::clamp(s * u, -1.0, 1.0); }, std::fabs(scale),
            "affine-clip"};
  }
  if (name == "sin-bounded") {
    double s = scale;
    return {[s](double u) { return s * std::sin(u); }, std::fabs(scale), "sin-bounded"};
  }
  throw ConfigError("unknown scalar function: " + name);
}

namespace {

OperatorSpec parse_operator(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  int dim = j.at("dim").get<int>();
  if (kind == "heat") return OperatorSpec::heat(dim);
  if (kind == "wave") return OperatorSpec::wave(dim);
  throw ConfigError("operator kind must be heat or wave");
}

KernelSpec parse_kernel(const json& j, int dim) {
  std::string fam = j.at("family").get<std::string>();
  if (fam == "product") {
    std::vector<KernelSpec> factors;
    for (const auto& f : j.at("factors")) factors.push_back(parse_kernel(f, 1));
    return KernelSpec::product(std::move(factors));
  }
  double alpha = j.at("alpha").get<double>();
  if (fam == "heat") return KernelSpec::heat(alpha, dim);
  if (fam == "riesz") return KernelSpec::riesz(alpha, dim);
  if (fam == "bessel") return KernelSpec::bessel(alpha, dim);
  if (fam == "poisson") return KernelSpec::poisson(alpha, dim);
  throw ConfigError("unknown kernel family: " + fam);
}

json kernel_to_json(const KernelSpec& k) {
  json j;
  j["family"] = k.name();
  if (k.family == KernelFamily::Product) {
    json factors = json::array();
    for (const auto& f : k.factors) factors.push_back(kernel_to_json(f));
    j["factors"] = factors;
  } else {
    j["alpha"] = k.alpha;
  }
  return j;
}

LevyMeasureSpec parse_measure(const json& j) {
  std::string fam = j.at("family").get<std::string>();
  if (fam == "gamma")
    return LevyMeasureSpec::gamma(j.at("alpha").get<double>(), j.at("beta").get<double>());
  if (fam == "variance-gamma")
    return LevyMeasureSpec::variance_gamma(j.at("theta").get<double>(),
                                           j.at("sigma").get<double>(),
                                           j.at("nu").get<double>());
  if (fam == "truncated-stable")
    return LevyMeasureSpec::truncated_stable(j.at("stable_index").get<double>(),
                                             j.at("cutoff").get<double>(),
                                             j.value("small_jump_eps", 1e-4));
  if (fam == "compound-poisson") {
    std::vector<JumpAtom> law;
    for (const auto& a : j.at("jump_law"))
      law.push_back({a.at("z").get<double>(), a.at("prob").get<double>()});
    return LevyMeasureSpec::compound_poisson(j.at("rate").get<double>(), std::move(law));
  }
  throw ConfigError("unknown measure family: " + fam);
}

json measure_to_json(const LevyMeasureSpec& m) {
  json j;
  j["family"] = m.name();
  switch (m.family) {
    case LevyFamily::Gamma:
      j["alpha"] = m.gamma_alpha;
      j["beta"] = m.gamma_beta;
      break;
    case LevyFamily::VarianceGamma:
      j["theta"] = m.vg_theta;
      j["sigma"] = m.vg_sigma;
      j["nu"] = m.vg_nu;
      break;
    case LevyFamily::TruncatedStable:
      j["stable_index"] = m.stable_index;
      j["cutoff"] = m.cutoff;
      j["small_jump_eps"] = m.small_jump_eps;
      break;
    case LevyFamily::CompoundPoisson: {
      j["rate"] = m.cp_rate;
      json law = json::array();
      for (const auto& a : m.jump_law) law.push_back({{"z", a.z}, {"prob", a.prob}});
      j["jump_law"] = law;
      break;
    }
  }
  return j;
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const json& raw, bool allow_no_dalang) {
  // a MANIFEST embeds the original config; accept it transparently
  const json& j = raw.contains("config") && raw.contains("config_hash")
                      ? raw.at("config")
                      : raw;
  if (j.value("schema_version", 0) != 1)
    throw ConfigError("config schema_version must be 1");

  ExperimentConfig cfg;
  cfg.op = parse_operator(j.at("operator"));
  cfg.kernel = parse_kernel(j.at("kernel"), cfg.op.dim);
  cfg.measure = parse_measure(j.at("measure"));

  const json& g = j.at("grid");
  cfg.grid.dim = cfg.op.dim;
  cfg.grid.half_width = g.at("half_width").get<double>();
  cfg.grid.points = g.at("points").get<std::size_t>();
  cfg.grid.time_step = g.at("time_step").get<double>();
  cfg.grid.horizon = g.at("horizon").get<double>();
  cfg.grid.validate();

  const json& mj = j.at("model");
  std::string mk = mj.at("kind").get<std::string>();
  if (mk == "linear") {
    cfg.model = ModelKind::Linear;
  } else if (mk == "anderson") {
    cfg.model = ModelKind::Anderson;
    cfg.lambda = mj.at("lambda").get<double>();
    cfg.eta = mj.at("eta").get<double>();
  } else if (mk == "nonlinear") {
    cfg.model = ModelKind::Nonlinear;
    cfg.sigma_name = mj.at("sigma").at("name").get<std::string>();
    cfg.sigma_scale = mj.at("sigma").value("scale", 1.0);
    if (mj.contains("drift")) {
      cfg.drift_name = mj.at("drift").at("name").get<std::string>();
      cfg.drift_scale = mj.at("drift").value("scale", 0.0);
    }
    cfg.eta = mj.at("eta").get<double>();
  } else {
    throw ConfigError("model kind must be linear, nonlinear, or anderson");
  }

  if (j.contains("analysis")) {
    const json& a = j.at("analysis");
    if (a.contains("p_list")) cfg.analysis.p_list = a.at("p_list").get<std::vector<double>>();
    if (a.contains("times")) cfg.analysis.times = a.at("times").get<std::vector<double>>();
    cfg.analysis.replicates = a.value("replicates", cfg.analysis.replicates);
    cfg.analysis.n_max = a.value("n_max", cfg.analysis.n_max);
    cfg.analysis.chaos_samples = a.value("chaos_samples", cfg.analysis.chaos_samples);
    if (a.contains("beta_grid"))
      cfg.analysis.beta_grid = a.at("beta_grid").get<std::vector<double>>();
    cfg.analysis.Bp = a.value("Bp", 0.0);
    cfg.analysis.lip_lower = a.value("lip_lower", 0.0);
    cfg.analysis.rho = a.value("rho", 0.0);
    if (a.contains("intermittency")) {
      const json& s = a.at("intermittency");
      cfg.analysis.intermittency.a_min = s.value("a_min", cfg.analysis.intermittency.a_min);
      cfg.analysis.intermittency.a_max = s.value("a_max", cfg.analysis.intermittency.a_max);
      cfg.analysis.intermittency.points_per_decade =
          s.value("points_per_decade", cfg.analysis.intermittency.points_per_decade);
      cfg.analysis.intermittency.beta_max =
          s.value("beta_max", cfg.analysis.intermittency.beta_max);
    }
    if (a.contains("lyapunov_window")) {
      auto w = a.at("lyapunov_window").get<std::vector<double>>();
      if (w.size() != 2) throw ConfigError("lyapunov_window must be [t_lo, t_hi]");
      cfg.analysis.lyapunov_window = {{w[0], w[1]}};
    }
  }
  if (cfg.analysis.times.empty()) cfg.analysis.times = {cfg.grid.horizon};

  cfg.seed = j.value("seed", 0ull);
  cfg.output_dir = j.value("output_dir", std::string("out"));

  // cross-field gates
  if (cfg.op.kind == OperatorKind::Wave && cfg.op.dim > 2)
    throw ConfigError("wave simulation requires d <= 2");
  if (!allow_no_dalang && !dalang_condition(cfg.kernel).holds)
    throw DalangError("dalang-condition-failed");
  for (double t : cfg.analysis.times) {
    double kf = t / cfg.grid.time_step;
    if (t <= 0.0 || t > cfg.grid.horizon + 1e-12 ||
        std::fabs(kf - std::llround(kf)) > 1e-9)
      throw ConfigError("analysis times must be positive grid times within the horizon");
  }
  // instantiating the named functions validates the registry names
  cfg.make_sigma();
  cfg.make_drift();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path, bool allow_no_dalang) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_json(j, allow_no_dalang);
}

json ExperimentConfig::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["operator"] = {{"kind", op.name()}, {"dim", op.dim}};
  j["kernel"] = kernel_to_json(kernel);
  j["measure"] = measure_to_json(measure);
  j["grid"] = {{"half_width", grid.half_width},
               {"points", grid.points},
               {"time_step", grid.time_step},
               {"horizon", grid.horizon}};
  switch (model) {
    case ModelKind::Linear: j["model"] = {{"kind", "linear"}}; break;
    case ModelKind::Anderson:
      j["model"] = {{"kind", "anderson"}, {"lambda", lambda}, {"eta", eta}};
      break;
    case ModelKind::Nonlinear:
      j["model"] = {{"kind", "nonlinear"},
                    {"sigma", {{"name", sigma_name}, {"scale", sigma_scale}}},
                    {"drift", {{"name", drift_name}, {"scale", drift_scale}}},
                    {"eta", eta}};
      break;
  }
  json a;
  a["p_list"] = analysis.p_list;
  a["times"] = analysis.times;
  a["replicates"] = analysis.replicates;
  a["n_max"] = analysis.n_max;
  a["chaos_samples"] = analysis.chaos_samples;
  if (!analysis.beta_grid.empty()) a["beta_grid"] = analysis.beta_grid;
  if (analysis.Bp > 0.0) a["Bp"] = analysis.Bp;
  if (analysis.lip_lower > 0.0) a["lip_lower"] = analysis.lip_lower;
  if (analysis.rho > 0.0) a["rho"] = analysis.rho;
  if (analysis.lyapunov_window)
    a["lyapunov_window"] = {analysis.lyapunov_window->first,
                            analysis.lyapunov_window->second};
  j["analysis"] = a;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  return j;
}

SimConfig ExperimentConfig::to_sim_config() const {
  SimConfig sc;
  sc.op = op;
  sc.kernel = kernel;
  sc.measure = measure;
  sc.model = model;
  sc.lambda = lambda;
  sc.eta = eta;
  sc.sigma = make_sigma();
  sc.drift = make_drift();
  sc.grid = grid;
  return sc;
}

ScalarFunc ExperimentConfig::make_sigma() const {
  if (model == ModelKind::Anderson) return ScalarFunc::scaled_linear(lambda);
  if (model == ModelKind::Linear) return ScalarFunc::one();
  return named_scalar_func(sigma_name, sigma_scale);
}

ScalarFunc ExperimentConfig::make_drift() const {
  if (model != ModelKind::Nonlinear) return ScalarFunc::zero();
  return named_scalar_func(drift_name, drift_scale);
}

double ExperimentConfig::rosenthal_Bp(double p) const {
  return analysis.Bp > 0.0 ? analysis.Bp : default_rosenthal_Bp(p);
}

} // namespace spde
