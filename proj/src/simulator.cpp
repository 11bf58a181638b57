#include "pdmpnet/simulator.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pdmpnet/rng.hpp"

namespace pdmpnet {

EventLog::EventLog(ModelParams params, std::string rate_id, NetworkState x0,
                   double horizon, SeedRecord seed, std::vector<double> times,
                   std::vector<std::uint32_t> indices,
                   std::vector<double> pre_states)
    : params_(std::move(params)),
      rate_id_(std::move(rate_id)),
      x0_(std::move(x0)),
      horizon_(horizon),
      seed_(seed),
      times_(std::move(times)),
      indices_(std::move(indices)),
      pre_states_(std::move(pre_states)) {
  if (!(horizon_ > 0.0)) throw ModelError("event log horizon must be positive");
  x0_.validate(params_);
  if (indices_.size() != times_.size() ||
      pre_states_.size() != times_.size() * params_.n_neurons)
    throw ModelError("inconsistent event log arrays");
  double prev = 0.0;
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (!(times_[k] > prev) || times_[k] > horizon_)
      throw ModelError("jump times must be strictly increasing in (0, horizon]");
    if (indices_[k] >= params_.n_neurons)
      throw ModelError("spiking index out of range");
    prev = times_[k];
  }
}

NetworkState EventLog::state_at(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) throw std::out_of_range("time outside [0, horizon]");
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t n = static_cast<std::size_t>(it - times_.begin());
  NetworkState out;
  out.clock = t;
  out.potentials.resize(n_neurons());
  if (n == 0) {
    flow_state(x0_.potentials, t, params_, out.potentials);
    return out;
  }
  std::vector<double> post(pre_state(n - 1).begin(), pre_state(n - 1).end());
  delta_jump_inplace(post, indices_[n - 1], params_.cap);
  flow_state(post, t - times_[n - 1], params_, out.potentials);
  return out;
}

EventLog EventLog::prefix(double t) const {
  if (!(t > 0.0 && t <= horizon_)) throw std::out_of_range("prefix horizon outside (0, horizon]");
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t n = static_cast<std::size_t>(it - times_.begin());
  return EventLog(params_, rate_id_, x0_, t, seed_,
                  std::vector<double>(times_.begin(), times_.begin() + n),
                  std::vector<std::uint32_t>(indices_.begin(), indices_.begin() + n),
                  std::vector<double>(pre_states_.begin(),
                                      pre_states_.begin() + n * n_neurons()));
}

void SimConfig::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ModelError("simulation horizon must be positive");
}

NetworkState SimConfig::initial_state(const ModelParams& params) const {
  NetworkState s;
  switch (policy) {
    case InitialPolicy::AllAtM: s.potentials.assign(params.n_neurons, params.m); break;
    case InitialPolicy::AllAtZero: s.potentials.assign(params.n_neurons, 0.0); break;
    case InitialPolicy::Explicit: s.potentials = explicit_state; break;
  }
  s.validate(params);
  return s;
}

namespace {

EventLog run_thinning(const ModelParams& params, const RateFunction& f,
                      const SimConfig& cfg, NetworkState x0) {
  const std::size_t n = params.n_neurons;
  const double envelope = static_cast<double>(n) * f(params.k_max);
  RandomStream rng(cfg.seed, cfg.stream);

  std::vector<double> times;
  std::vector<std::uint32_t> indices;
  std::vector<double> pre_states;
  const std::size_t reserve = static_cast<std::size_t>(
      std::min(1e7, 0.6 * envelope * cfg.horizon));
  times.reserve(reserve);
  indices.reserve(reserve);
  pre_states.reserve(reserve * n);

  std::vector<double> post = x0.potentials;
  std::vector<double> pre(n);
  std::vector<double> rates(n);
  double last_jump = 0.0;
  double clock = 0.0;
  std::uint64_t candidates = 0;

  while (true) {
    clock += rng.exponential() / envelope;
    if (clock > cfg.horizon) break;
    ++candidates;
    flow_state(post, clock - last_jump, params, pre);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rates[i] = f(pre[i]);
      total += rates[i];
    }
    if (!(rng.uniform() * envelope < total)) continue;

    const double target = rng.uniform() * total;
    std::size_t chosen = n;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cumulative += rates[i];
      if (target < cumulative) {
        chosen = i;
        break;
      }
    }
    if (chosen == n) {
      // Rounding left target == total; take the last neuron with positive rate.
      for (std::size_t i = n; i-- > 0;) {
        if (rates[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    }

    times.push_back(clock);
    indices.push_back(static_cast<std::uint32_t>(chosen));
    pre_states.insert(pre_states.end(), pre.begin(), pre.end());
    post = pre;
    delta_jump_inplace(post, chosen, params.cap);
    last_jump = clock;
  }

  SeedRecord seed{cfg.seed, cfg.stream, rng.consumed(), candidates};
  return EventLog(params, f.descriptor(), std::move(x0), cfg.horizon, seed,
                  std::move(times), std::move(indices), std::move(pre_states));
}

}  // namespace

EventLog simulate(const ModelParams& params, const RateFunction& f,
                  const SimConfig& cfg) {
  params.validate();
  cfg.validate();
  f.validate(params.k_max);
  return run_thinning(params, f, cfg, cfg.initial_state(params));
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("malformed number: " + s);
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void write_event_log(const EventLog& log, const std::string& csv_path) {
  const std::size_t n = log.n_neurons();
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path);
    out << "time,index";
    for (std::size_t i = 0; i < n; ++i) out << ",pre_state_" << i;
    out << '\n';
    for (std::size_t k = 0; k < log.jump_count(); ++k) {
      out << format_double(log.time(k)) << ',' << log.index(k);
      for (double x : log.pre_state(k)) out << ',' << format_double(x);
      out << '\n';
    }
  }
  std::ofstream meta(csv_path + ".meta", std::ios::binary);
  if (!meta) throw std::runtime_error("cannot write " + csv_path + ".meta");
  const auto& p = log.params();
  const auto& s = log.seed();
  meta << "schema-version = 1\n"
       << "n_neurons = " << p.n_neurons << '\n'
       << "lambda = " << format_double(p.lambda) << '\n'
       << "m = " << format_double(p.m) << '\n'
       << "k_max = " << format_double(p.k_max) << '\n'
       << "rate = " << log.rate_id() << '\n'
       << "horizon = " << format_double(log.horizon()) << '\n'
       << "master_seed = " << s.master_seed << '\n'
       << "stream_index = " << s.stream_index << '\n'
       << "uniforms_consumed = " << s.uniforms_consumed << '\n'
       << "candidates = " << s.candidates << '\n'
       << "jump_count = " << log.jump_count() << '\n'
       << "x0 = ";
  for (std::size_t i = 0; i < n; ++i)
    meta << (i ? "," : "") << format_double(log.x0().potentials[i]);
  meta << '\n';
}

EventLog read_event_log(const std::string& csv_path) {
  std::ifstream meta(csv_path + ".meta");
  if (!meta) throw std::runtime_error("cannot open " + csv_path + ".meta");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(meta, line)) {
    if (trim(line).empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("malformed metadata line: " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto get = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("metadata missing key " + key);
    return it->second;
  };
  if (get("schema-version") != "1") throw std::runtime_error("unsupported event log schema");

  const ModelParams params = ModelParams::make(
      std::stoul(get("n_neurons")), parse_double(get("lambda")),
      parse_double(get("m")), parse_double(get("k_max")));
  NetworkState x0;
  for (const auto& cell : split(get("x0"), ',')) x0.potentials.push_back(parse_double(cell));
  SeedRecord seed{std::stoull(get("master_seed")), std::stoull(get("stream_index")),
                  std::stoull(get("uniforms_consumed")), std::stoull(get("candidates"))};

  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path);
  const std::size_t n = params.n_neurons;
  std::vector<double> times, pre;
  std::vector<std::uint32_t> indices;
  std::getline(in, line);  // header
  if (split(line, ',').size() != n + 2) throw std::runtime_error("event log header does not match N");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != n + 2) throw std::runtime_error("malformed event log row");
    times.push_back(parse_double(cells[0]));
    indices.push_back(static_cast<std::uint32_t>(std::stoul(cells[1])));
    for (std::size_t i = 0; i < n; ++i) pre.push_back(parse_double(cells[i + 2]));
  }
  if (times.size() != std::stoull(get("jump_count")))
    throw std::runtime_error("event log row count does not match metadata");
  return EventLog(params, get("rate"), std::move(x0), parse_double(get("horizon")),
                  seed, std::move(times), std::move(indices), std::move(pre));
}

void RegenProbeConfig::validate(const ModelParams& params) const {
  if (!(epsilon > 0.0) || !(delta_star > 0.0))
    throw ModelError("epsilon and delta* must be positive");
  if (replications == 0) throw ModelError("regeneration probe needs replications");
  if (!(params.k_max > 1.0 + 1.0 / static_cast<double>(params.n_neurons)))
    throw ModelError("regeneration probe requires K > 1 + 1/N");
}

std::vector<double> regeneration_point(std::size_t n_neurons) {
  std::vector<double> u(n_neurons);
  for (std::size_t i = 0; i < n_neurons; ++i)
    u[i] = static_cast<double>(n_neurons - 1 - i) / static_cast<double>(n_neurons);
  return u;
}

RegenProbeReport regen_probe(const ModelParams& params, const RateFunction& f,
                             const RegenProbeConfig& cfg) {
  cfg.validate(params);
  f.validate(params.k_max);
  const std::size_t n = params.n_neurons;
  const double eps = cfg.epsilon;

  RegenProbeReport report;
  report.u_star = regeneration_point(n);
  report.t_star = static_cast<double>(n) * eps;
  report.replications = cfg.replications;

  std::size_t hits_event = 0, hits_ball = 0;
  for (std::size_t r = 0; r < cfg.replications; ++r) {
    RandomStream starts(cfg.seed, 2 * r + 1);
    SimConfig sim;
    sim.horizon = report.t_star;
    sim.seed = cfg.seed;
    sim.stream = 2 * r;
    sim.policy = InitialPolicy::Explicit;
    sim.explicit_state.resize(n);
    for (double& x : sim.explicit_state) x = starts.uniform() * params.k_max;
    const EventLog log = run_thinning(params, f, sim, sim.initial_state(params));

    bool event = log.jump_count() >= n;
    for (std::size_t k = 0; event && k < n; ++k) {
      const double lo = (k + 1) * eps - eps / 4.0;
      const double hi = (k + 1) * eps;
      event = log.time(k) > lo && log.time(k) < hi && log.index(k) == k;
    }
    hits_event += event ? 1 : 0;

    const NetworkState end = log.state_at(report.t_star);
    double dist = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      dist = std::max(dist, std::abs(end.potentials[i] - report.u_star[i]));
    hits_ball += dist < cfg.delta_star ? 1 : 0;
  }

  // Agresti-Coull standard errors stay positive when no replication hits.
  const double reps = static_cast<double>(cfg.replications);
  auto se = [&](std::size_t hits) {
    const double p = (static_cast<double>(hits) + 2.0) / (reps + 4.0);
    return std::sqrt(p * (1.0 - p) / (reps + 4.0));
  };
  report.freq_event = hits_event / reps;
  report.se_event = se(hits_event);
  report.freq_ball = hits_ball / reps;
  report.se_ball = se(hits_ball);

  const HolderClass& hc = f.holder();
  const double low = (1.0 - std::exp(-0.75 * params.lambda * eps)) * params.m;
  const double factor = (eps / 4.0) * hc.f_min(low) *
                        std::exp(-report.t_star * static_cast<double>(n) * hc.sup_bound);
  report.analytic_bound = std::pow(factor, static_cast<double>(n));
  return report;
}

}  // namespace pdmpnet
