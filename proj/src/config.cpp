#include "pdmpnet/config.hpp"

#include <cmath>
#include <fstream>

#include "pdmpnet/estimator.hpp"

namespace pdmpnet {

namespace {

using nlohmann::json;

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  if (!doc.contains(key)) return empty;
  if (!doc.at(key).is_object())
    throw ConfigError(std::string("section '") + key + "' must be an object");
  return doc.at(key);
}

InitialPolicy parse_policy(const json& value, std::vector<double>& state) {
  if (value.is_array()) {
    state = value.get<std::vector<double>>();
    return InitialPolicy::Explicit;
  }
  const std::string name = value.get<std::string>();
  if (name == "m") return InitialPolicy::AllAtM;
  if (name == "zero") return InitialPolicy::AllAtZero;
  throw ConfigError("initial state must be \"m\", \"zero\" or an array, got '" + name + "'");
}

RateFunction parse_rate(const json& doc, const ModelParams& params) {
  const json& rate = section(doc, "rate");
  const std::string family = get_or<std::string>(rate, "family", "linear");
  const double scale = get_or(rate, "scale", 1.0);
  RateFamily fam;
  if (family == "linear") fam = RateFamily::Linear;
  else if (family == "log1p") fam = RateFamily::Log1p;
  else if (family == "expm1") fam = RateFamily::ExpM1;
  else if (family == "table") fam = RateFamily::UserTable;
  else throw ConfigError("unknown rate family '" + family + "'");

  HolderClass hc = fam == RateFamily::UserTable ? HolderClass{}
                                                : default_holder(fam, scale, params.k_max);
  if (doc.contains("holder")) {
    const json& h = section(doc, "holder");
    hc.beta = get_or(h, "beta", hc.beta);
    hc.sup_bound = get_or(h, "sup_bound", hc.sup_bound);
    hc.holder_const = get_or(h, "holder_const", hc.holder_const);
    hc.fmin_slope = get_or(h, "fmin_slope", hc.fmin_slope);
  } else if (fam == RateFamily::UserTable) {
    throw ConfigError("a table rate needs an explicit 'holder' section");
  }

  switch (fam) {
    case RateFamily::Linear: return RateFunction::linear(scale, hc);
    case RateFamily::Log1p: return RateFunction::log1p(scale, hc);
    case RateFamily::ExpM1: return RateFunction::expm1(scale, hc);
    default: break;
  }
  if (rate.contains("path")) return RateFunction::table_from_csv(rate.at("path"), hc);
  return RateFunction::table(get_or(rate, "xs", std::vector<double>{}),
                             get_or(rate, "ys", std::vector<double>{}), hc);
}

KernelSpec parse_kernel(const json& doc, double beta) {
  KernelSpec spec = KernelSpec::default_for(beta);
  if (!doc.contains("kernel")) return spec;
  const json& k = section(doc, "kernel");
  if (k.contains("family")) spec.family = kernel_family_from_string(k.at("family"));
  spec.radius = get_or(k, "radius", spec.radius);
  spec.order = get_or(k, "order", spec.order);
  if (k.contains("base")) spec.base = kernel_family_from_string(k.at("base"));
  return spec;
}

StudyConfig parse_study(const json& st, const RunConfig& run) {
  StudyConfig cfg;
  cfg.kind = study_kind_from_string(get_or<std::string>(st, "kind", ""));
  cfg.params = run.params;
  cfg.f = run.f;
  cfg.kernel = run.kernel;
  cfg.seed = run.seed;
  cfg.region_d = run.region_d;
  cfg.points = get_or(st, "points", run.points);
  cfg.horizons = get_or(st, "horizons", std::vector<double>{});
  cfg.replications = get_or<std::size_t>(st, "replications", 1);
  cfg.threads = get_or<std::size_t>(st, "threads", 1);
  if (st.contains("initial")) {
    std::vector<double> unused;
    cfg.start = parse_policy(st.at("initial"), unused);
    if (cfg.start == InitialPolicy::Explicit)
      throw ConfigError("study 'initial' must be \"m\" or \"zero\"");
  }
  cfg.bandwidth_exponent = get_or(st, "bandwidth_exponent", cfg.bandwidth_exponent);
  if (st.contains("start_a")) cfg.start_a = parse_policy(st.at("start_a"), cfg.start_a_state);
  cfg.start_b_state = get_or(st, "start_b", cfg.start_b_state);
  cfg.times = get_or(st, "times", cfg.times);
  cfg.bins = get_or(st, "bins", cfg.bins);
  cfg.powers = get_or(st, "powers", cfg.powers);
  cfg.grid_step = get_or(st, "grid_step", cfg.grid_step);
  cfg.density_h = get_or(st, "density_h", cfg.density_h);
  cfg.batches = get_or(st, "batches", cfg.batches);
  cfg.amplitude = get_or(st, "amplitude", cfg.amplitude);
  cfg.epsilon = get_or(st, "epsilon", cfg.epsilon);
  cfg.delta_star = get_or(st, "delta_star", cfg.delta_star);
  return cfg;
}

}  // namespace

HolderClass default_holder(RateFamily family, double scale, double k_max) {
  HolderClass hc;
  hc.beta = 1.0;
  double sup = 0.0, osc = 0.0;
  switch (family) {
    case RateFamily::Linear:
      sup = std::max(scale * k_max, scale);
      hc.fmin_slope = scale;
      break;
    case RateFamily::Log1p:
      sup = std::max(scale * std::log1p(k_max), scale);
      osc = scale * (1.0 - 1.0 / (1.0 + k_max));
      hc.fmin_slope = scale * std::log1p(k_max) / k_max;
      break;
    case RateFamily::ExpM1:
      sup = scale * std::exp(k_max);
      osc = scale * std::expm1(k_max);
      hc.fmin_slope = scale;
      break;
    default:
      throw ConfigError("no default class for " + to_string(family) + " rates");
  }
  hc.sup_bound = 1.25 * sup;
  hc.holder_const = osc + 0.5 * scale;
  return hc;
}

void RunConfig::validate() const {
  params.validate();
  f.validate(params.k_max);
  f.holder().validate();
  sim.validate();
  const int needed = f.holder().order();
  if (kernel.order < needed)
    throw ConfigError("kernel order " + std::to_string(kernel.order) +
                      " does not cancel the moments required by beta = " +
                      std::to_string(f.holder().beta));
  for (double a : points) {
    if (!region_check(a, params, f.holder(), region_d))
      throw ConfigError("evaluation point " + std::to_string(a) +
                        " lies outside the admissible region");
  }
  if (study) study->validate();
}

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("schema-version"))
    throw ConfigError("config is missing 'schema-version'");
  const int version = doc.at("schema-version").get<int>();
  if (version != kConfigSchemaVersion)
    throw ConfigError("unsupported schema-version " + std::to_string(version));

  RunConfig run;
  try {
    run.seed = get_or<std::uint64_t>(doc, "seed", 0);
    run.output_dir = get_or<std::string>(doc, "output", ".");
    const json& model = section(doc, "model");
    run.params = ModelParams::make(get_or<std::size_t>(model, "n_neurons", 0),
                                   get_or(model, "lambda", 1.0), get_or(model, "m", 1.0),
                                   get_or(model, "k_max", 2.0));
    run.f = parse_rate(doc, run.params);
    run.kernel = parse_kernel(doc, run.f.holder().beta);

    const json& sim = section(doc, "simulation");
    run.sim.horizon = get_or(sim, "horizon", 1.0);
    run.sim.stream = get_or<std::uint64_t>(sim, "stream", 0);
    run.sim.seed = run.seed;
    if (sim.contains("initial"))
      run.sim.policy = parse_policy(sim.at("initial"), run.sim.explicit_state);

    const json& est = section(doc, "estimate");
    run.points = get_or(est, "points", std::vector<double>{});
    run.region_d = get_or(est, "region_d", run.region_d);
    run.level = get_or(est, "level", run.level);

    if (doc.contains("study")) run.study = parse_study(section(doc, "study"), run);
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  run.validate();
  return run;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return parse_run_config(doc);
}

}  // namespace pdmpnet
