#include "pdmpnet/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "pdmpnet/likelihood.hpp"
#include "pdmpnet/quadrature.hpp"
#include "pdmpnet/stats.hpp"

namespace pdmpnet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

EventLog run_one(const StudyConfig& cfg, double horizon, std::uint64_t stream,
                 InitialPolicy policy, const std::vector<double>& state = {}) {
  SimConfig sim;
  sim.horizon = horizon;
  sim.seed = cfg.seed;
  sim.stream = stream;
  sim.policy = policy;
  sim.explicit_state = state;
  return simulate(cfg.params, cfg.f, sim);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool needs_points(StudyKind kind) {
  return kind == StudyKind::Rate || kind == StudyKind::Clt || kind == StudyKind::Scv ||
         kind == StudyKind::Likelihood;
}

}  // namespace

std::string to_string(StudyKind kind) {
  switch (kind) {
    case StudyKind::Rate: return "rate";
    case StudyKind::Clt: return "clt";
    case StudyKind::Ergodic: return "ergodic";
    case StudyKind::Exchange: return "exchange";
    case StudyKind::JumpChain: return "jumpchain";
    case StudyKind::Density: return "density";
    case StudyKind::Scv: return "scv";
    case StudyKind::Likelihood: return "likelihood";
    case StudyKind::Regen: return "regen";
  }
  return "unknown";
}

StudyKind study_kind_from_string(const std::string& name) {
  for (StudyKind k : {StudyKind::Rate, StudyKind::Clt, StudyKind::Ergodic,
                      StudyKind::Exchange, StudyKind::JumpChain, StudyKind::Density,
                      StudyKind::Scv, StudyKind::Likelihood, StudyKind::Regen}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown study kind '" + name + "'");
}

KernelSpec KernelSpec::default_for(double beta) {
  KernelSpec spec;
  const int order = static_cast<int>(std::floor(beta));
  if (order > 1) {
    spec.family = KernelFamily::HighOrder;
    spec.order = order;
  }
  return spec;
}

void StudyConfig::validate() const {
  params.validate();
  f.validate(params.k_max);
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  if (kind != StudyKind::Regen && kind != StudyKind::Ergodic) {
    if (horizons.empty()) throw std::invalid_argument("at least one horizon is required");
    for (double t : horizons)
      if (!(t > 0.0)) throw std::invalid_argument("horizons must be positive");
  }
  if (needs_points(kind)) {
    if (points.empty()) throw std::invalid_argument("at least one evaluation point is required");
    for (double a : points) {
      if (!region_check(a, params, f.holder(), region_d))
        throw std::invalid_argument("evaluation point " + fmt(a) +
                                    " lies outside the admissible region");
    }
  }
  if (kind == StudyKind::Clt) {
    const double floor_exp = 1.0 / (2.0 * f.holder().beta + 1.0);
    if (!(bandwidth_exponent > floor_exp))
      throw std::invalid_argument("CLT bandwidth exponent must exceed 1/(2 beta + 1)");
  }
  if (kind == StudyKind::Ergodic) {
    if (times.empty()) throw std::invalid_argument("ergodic study needs a time grid");
    for (double t : times)
      if (!(t >= 0.0)) throw std::invalid_argument("ergodic times must be non-negative");
    if (bins < 1) throw std::invalid_argument("bins must be at least 1");
  }
  if (kind == StudyKind::JumpChain && batches < 2)
    throw std::invalid_argument("jump-chain study needs at least two batches");
  if (kind == StudyKind::Density && !(grid_step > 0.0 && density_h > 0.0))
    throw std::invalid_argument("density grid step and bandwidth must be positive");
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t r = 0; r < count; ++r) fn(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= count) return;
      try {
        fn(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t study_stream(StudyKind kind, std::size_t slot, std::size_t r) {
  return (static_cast<std::uint64_t>(kind) + 1) << 44 |
         static_cast<std::uint64_t>(slot) << 24 | static_cast<std::uint64_t>(r);
}

// ---------------------------------------------------------------- rate

RateStudyResult rate_study(const StudyConfig& cfg) {
  cfg.validate();
  const Kernel q = cfg.kernel.build();
  const double beta = cfg.f.holder().beta;
  const std::size_t np = cfg.points.size();
  RateStudyResult res;

  // Admissibility thresholds from one pilot run at the shortest horizon.
  const double t_pilot = *std::min_element(cfg.horizons.begin(), cfg.horizons.end());
  const EventLog pilot =
      run_one(cfg, t_pilot, study_stream(cfg.kind, 0xFFFFF, 0), cfg.start);
  for (double a : cfg.points)
    res.thresholds.push_back(
        pilot_threshold(pilot, a, default_bandwidth(t_pilot, beta), q, 1.0));

  for (std::size_t s = 0; s < cfg.horizons.size(); ++s) {
    const double t = cfg.horizons[s];
    const double h = default_bandwidth(t, beta);
    std::vector<EstimateReport> reports(cfg.replications * np);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
      const EventLog log = run_one(cfg, t, study_stream(cfg.kind, s, r), cfg.start);
      for (std::size_t p = 0; p < np; ++p)
        reports[r * np + p] = estimate_at(log, cfg.points[p], h, q, res.thresholds[p]);
    });
    for (std::size_t p = 0; p < np; ++p) {
      RateRow row;
      row.horizon = t;
      row.a = cfg.points[p];
      row.h = h;
      row.truth = cfg.f(row.a);
      std::vector<double> est, sq;
      for (std::size_t r = 0; r < cfg.replications; ++r) {
        const auto& rep = reports[r * np + p];
        if (!rep.a_tr_satisfied) continue;
        est.push_back(rep.f_hat);
        sq.push_back((rep.f_hat - row.truth) * (rep.f_hat - row.truth));
      }
      row.kept = est.size();
      row.discard_rate = 1.0 - static_cast<double>(row.kept) / cfg.replications;
      if (row.kept > 0) {
        row.mean_f_hat = stats::mean(est);
        row.bias = row.mean_f_hat - row.truth;
        const double mse = stats::mean(sq);
        row.rmse = std::sqrt(mse);
        row.rmse_se = row.rmse > 0.0 ? stats::standard_error(sq) / (2.0 * row.rmse) : 0.0;
      } else {
        row.mean_f_hat = row.bias = row.rmse = row.rmse_se = kNaN;
      }
      res.rows.push_back(row);
    }
  }

  for (std::size_t p = 0; p < np; ++p) {
    std::vector<double> lx, ly;
    bool ok = cfg.horizons.size() >= 2;
    for (const auto& row : res.rows) {
      if (row.a != cfg.points[p]) continue;
      if (row.kept == 0 || !(row.rmse > 0.0)) ok = false;
      else {
        lx.push_back(std::log(row.horizon));
        ly.push_back(std::log(row.rmse));
      }
    }
    if (ok) {
      const auto fit = stats::linear_fit(lx, ly);
      res.slopes.push_back(fit.slope);
      res.slope_se.push_back(fit.slope_se);
    } else {
      res.slopes.push_back(kNaN);
      res.slope_se.push_back(kNaN);
    }
    res.slope_available.push_back(ok);
  }
  return res;
}

// ---------------------------------------------------------------- clt

CltStudyResult clt_study(const StudyConfig& cfg) {
  cfg.validate();
  const Kernel q = cfg.kernel.build();
  CltStudyResult res;
  res.horizon = cfg.horizons.front();
  res.a = cfg.points.front();
  res.h = std::pow(res.horizon, -cfg.bandwidth_exponent);
  const double truth = cfg.f(res.a);
  const double n_t = static_cast<double>(cfg.params.n_neurons) * res.horizon;

  std::vector<double> z(cfg.replications, kNaN);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    const EventLog log =
        run_one(cfg, res.horizon, study_stream(cfg.kind, 0, r), cfg.start);
    const auto rep = estimate_at(log, res.a, res.h, q, 0.0);
    if (!(rep.pi1_hat > 0.0) || !(rep.f_hat > 0.0)) return;
    const double var = rep.f_hat * q.integral_sq() / (n_t * rep.pi1_hat * res.h);
    z[r] = (rep.f_hat - truth) / std::sqrt(var);
  });
  for (double v : z) {
    if (std::isnan(v)) ++res.dropped;
    else res.standardized.push_back(v);
  }
  if (res.standardized.empty()) throw std::runtime_error("every CLT replication was degenerate");
  const auto ks = stats::ks_test_normal(res.standardized);
  res.ks_statistic = ks.statistic;
  res.ks_p_value = ks.p_value;
  res.mean_z = stats::mean(res.standardized);
  res.var_z = stats::variance(res.standardized);
  return res;
}

// ---------------------------------------------------------------- ergodic

ErgodicStudyResult ergodic_study(const StudyConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.params.n_neurons;
  std::vector<double> times = cfg.times;
  std::sort(times.begin(), times.end());
  const double horizon = std::max(times.back(), 1e-9);
  const std::vector<double> state_b =
      cfg.start_b_state.empty() ? std::vector<double>(n, cfg.params.k_max) : cfg.start_b_state;

  const std::size_t reps = cfg.replications;
  const std::size_t nt = times.size();
  // samples[start][time][rep * n + i]
  std::vector<std::vector<std::vector<double>>> samples(
      2, std::vector<std::vector<double>>(nt, std::vector<double>(reps * n)));
  parallel_for(2 * reps, cfg.threads, [&](std::size_t job) {
    const std::size_t side = job / reps, r = job % reps;
    const EventLog log =
        side == 0 ? run_one(cfg, horizon, study_stream(cfg.kind, 0, r), cfg.start_a,
                            cfg.start_a_state)
                  : run_one(cfg, horizon, study_stream(cfg.kind, 1, r),
                            InitialPolicy::Explicit, state_b);
    for (std::size_t k = 0; k < nt; ++k) {
      const auto st = log.state_at(times[k]);
      std::copy(st.potentials.begin(), st.potentials.end(),
                samples[side][k].begin() + static_cast<std::ptrdiff_t>(r * n));
    }
  });

  ErgodicStudyResult res;
  res.degenerate = cfg.bins == 1;
  for (std::size_t k = 0; k < nt; ++k) {
    ErgodicRow row;
    row.time = times[k];
    row.tv = stats::histogram_tv(samples[0][k], samples[1][k], 0.0, cfg.params.k_max, cfg.bins);
    if (reps >= 2) {
      // Split start A by replication parity for the sampling-noise floor.
      std::vector<double> even, odd;
      for (std::size_t r = 0; r < reps; ++r) {
        auto& dst = r % 2 == 0 ? even : odd;
        dst.insert(dst.end(), samples[0][k].begin() + static_cast<std::ptrdiff_t>(r * n),
                   samples[0][k].begin() + static_cast<std::ptrdiff_t>((r + 1) * n));
      }
      row.noise_floor = stats::histogram_tv(even, odd, 0.0, cfg.params.k_max, cfg.bins);
    }
    res.rows.push_back(row);
  }
  for (std::size_t k = 1; k < nt; ++k) {
    const auto& prev = res.rows[k - 1];
    const auto& cur = res.rows[k];
    if (cur.tv > prev.tv + 2.0 * std::max(cur.noise_floor, prev.noise_floor) + 1e-12)
      res.monotone = false;
  }
  std::vector<double> lx, ly;
  for (auto& row : res.rows) {
    if (row.tv > 2.0 * row.noise_floor && row.tv > 0.0 && row.tv < 1.0) {
      row.in_fit = true;
      lx.push_back(row.time);
      ly.push_back(std::log(row.tv));
    }
  }
  res.fit_points = lx.size();
  if (lx.size() >= 2) {
    const auto fit = stats::linear_fit(lx, ly);
    res.decay_rate = -fit.slope;
    res.kappa_hat = std::exp(res.decay_rate);
    res.fit_r_squared = fit.r_squared;
  }
  return res;
}

// ---------------------------------------------------------------- exchange

ExchangeStudyResult exchange_study(const StudyConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.params.n_neurons;
  const double t = cfg.horizons.front();
  std::vector<double> counts(cfg.replications * n, 0.0);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    const EventLog log = run_one(cfg, t, study_stream(cfg.kind, 0, r), cfg.start);
    for (std::size_t k = 0; k < log.jump_count(); ++k) counts[r * n + log.index(k)] += 1.0;
  });
  ExchangeStudyResult res;
  std::vector<double> totals(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> col(cfg.replications);
    for (std::size_t r = 0; r < cfg.replications; ++r) col[r] = counts[r * n + i];
    res.mean_counts.push_back(stats::mean(col));
    res.count_se.push_back(stats::standard_error(col));
    totals[i] = std::accumulate(col.begin(), col.end(), 0.0);
  }
  if (n >= 2 && std::accumulate(totals.begin(), totals.end(), 0.0) > 0.0) {
    const auto chi = stats::chi_square_uniform(totals);
    res.chi_square = chi.statistic;
    res.dof = chi.dof;
    res.p_value = chi.p_value;
  }
  return res;
}

// ---------------------------------------------------------------- jump chain

JumpChainComparison jump_chain_compare(const EventLog& log, const RateFunction& f,
                                       const std::function<double(std::span<const double>)>& g,
                                       std::size_t batches, double tol) {
  const std::size_t jumps = log.jump_count();
  if (jumps < batches || batches < 2)
    throw std::invalid_argument("jump chain shorter than the batch count");
  const ModelParams& params = log.params();
  const std::size_t n = params.n_neurons;

  std::vector<double> chain(batches, 0.0), fg(batches, 0.0), fbar(batches, 0.0);
  std::vector<std::size_t> batch_jumps(batches, 0);
  auto batch_of = [&](std::size_t k) { return std::min(batches - 1, k * batches / jumps); };
  for (std::size_t k = 0; k < jumps; ++k) {
    chain[batch_of(k)] += g(log.pre_state(k));
    ++batch_jumps[batch_of(k)];
  }

  std::vector<double> x(n);
  std::size_t seg = 0;
  log.for_each_segment([&](double, double duration, std::span<const double> start,
                           std::span<const double>) {
    const std::size_t b = batch_of(std::min(seg, jumps - 1));
    ++seg;
    if (!(duration > 0.0)) return;
    double rate_part = 0.0;
    auto weighted = [&](double u, bool with_g) {
      flow_state(start, u, params, x);
      const double fb = rate_bar(x, f);
      return with_g ? fb * g(x) : fb;
    };
    rate_part = integrate([&](double u) { return weighted(u, false); }, 0.0, duration, tol);
    fbar[b] += rate_part;
    fg[b] += integrate([&](double u) { return weighted(u, true); }, 0.0, duration, tol);
  });

  JumpChainComparison cmp;
  const double chain_total = std::accumulate(chain.begin(), chain.end(), 0.0);
  const double fg_total = std::accumulate(fg.begin(), fg.end(), 0.0);
  const double fbar_total = std::accumulate(fbar.begin(), fbar.end(), 0.0);
  cmp.chain_average = chain_total / static_cast<double>(jumps);
  cmp.weighted_time_average = fbar_total > 0.0 ? fg_total / fbar_total : 0.0;
  cmp.gap = cmp.chain_average - cmp.weighted_time_average;
  std::vector<double> gaps;
  for (std::size_t b = 0; b < batches; ++b) {
    const double lhs = chain[b] / static_cast<double>(batch_jumps[b]);
    const double rhs = fbar[b] > 0.0 ? fg[b] / fbar[b] : 0.0;
    gaps.push_back(lhs - rhs);
  }
  cmp.se = stats::standard_error(gaps);
  return cmp;
}

JumpChainStudyResult jump_chain_study(const StudyConfig& cfg) {
  cfg.validate();
  const EventLog log =
      run_one(cfg, cfg.horizons.front(), study_stream(cfg.kind, 0, 0), cfg.start);
  JumpChainStudyResult res;
  res.jumps = log.jump_count();
  for (int p : cfg.powers) {
    auto cmp = jump_chain_compare(
        log, cfg.f, [p](std::span<const double> z) { return std::pow(z[0], p); }, cfg.batches);
    cmp.label = "x1^" + std::to_string(p);
    res.comparisons.push_back(cmp);
  }
  return res;
}

// ---------------------------------------------------------------- density

DensityStudyResult invariant_density_study(const StudyConfig& cfg) {
  cfg.validate();
  const Kernel q = cfg.kernel.build();
  const double k_max = cfg.params.k_max;
  const EventLog log =
      run_one(cfg, cfg.horizons.front(), study_stream(cfg.kind, 0, 0), cfg.start);
  std::vector<double> grid;
  for (double a = 0.5 * cfg.grid_step; a < k_max; a += cfg.grid_step) grid.push_back(a);
  const auto dens = occupation_density(log, grid, cfg.density_h, q);

  DensityStudyResult res;
  res.jumps = log.jump_count();
  const EstimationRegion region(cfg.params, cfg.f.holder(), cfg.region_d);
  double region_sum = 0.0, zero_sum = 0.0;
  std::size_t region_count = 0, zero_count = 0;
  res.min_in_region = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    DensityRow row;
    row.a = grid[k];
    row.pi1_hat = dens[k];
    row.in_region = region.contains(row.a);
    const double edge = std::max(cfg.region_d, static_cast<double>(region.order) /
                                                    static_cast<double>(cfg.params.n_neurons));
    if (row.a <= edge) row.zone = "zero";
    else if (std::abs(row.a - cfg.params.m) <= cfg.region_d) row.zone = "m";
    else if (row.a >= k_max - edge) row.zone = "K";
    else row.zone = "interior";
    res.mass += row.pi1_hat * cfg.grid_step;
    if (row.in_region) {
      res.min_in_region = std::min(res.min_in_region, row.pi1_hat);
      region_sum += row.pi1_hat;
      ++region_count;
    }
    if (row.a <= 0.1) {
      zero_sum += row.pi1_hat;
      ++zero_count;
    }
    res.rows.push_back(row);
  }
  if (region_count == 0) res.min_in_region = 0.0;
  res.positive_on_region = region_count > 0 && res.min_in_region > 0.0;
  res.mean_in_region = region_count ? region_sum / region_count : 0.0;
  res.mean_near_zero = zero_count ? zero_sum / zero_count : 0.0;
  return res;
}

// ---------------------------------------------------------------- scv

ScvStudyResult scv_study(const StudyConfig& cfg) {
  cfg.validate();
  const Kernel q = cfg.kernel.build();
  ScvStudyResult res;
  res.a = cfg.points.front();
  res.truth = cfg.f(res.a);
  const double t = cfg.horizons.front();
  const std::vector<double> grid =
      ScvConfig::log_grid(std::pow(t, -0.5), std::pow(t, -0.125), 32);

  const std::size_t reps = cfg.replications;
  res.rows.resize(reps);
  std::vector<std::vector<double>> per_h(reps, std::vector<double>(grid.size()));
  std::vector<double> first_scores;
  parallel_for(reps, cfg.threads, [&](std::size_t r) {
    const EventLog log = run_one(cfg, t, study_stream(cfg.kind, 0, r), cfg.start);
    ScvConfig sc = ScvConfig::defaults(log);
    sc.grid = grid;
    const ScvResult sel = scv_select(log, sc, q);
    ScvRow row;
    row.replication = r;
    row.jumps = log.jump_count();
    row.h_hat = sel.h_hat;
    row.interior = sel.interior();
    for (std::size_t j = 0; j < grid.size(); ++j)
      per_h[r][j] = estimate_at(log, res.a, grid[j], q, 0.0).f_hat;
    row.f_hat_scv = per_h[r][sel.index];
    res.rows[r] = row;
    if (r == 0) first_scores = sel.scores;
  });
  res.first_curve_h = grid;
  res.first_curve_score = first_scores;

  auto rmse_of = [&](auto value) {
    double s = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double e = value(r) - res.truth;
      s += e * e;
    }
    return std::sqrt(s / static_cast<double>(reps));
  };
  std::vector<double> rmse_h(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j)
    rmse_h[j] = rmse_of([&](std::size_t r) { return per_h[r][j]; });
  const std::size_t best = argmin_smallest(grid, rmse_h);
  res.oracle_h = grid[best];
  res.rmse_oracle = rmse_h[best];
  for (std::size_t r = 0; r < reps; ++r) res.rows[r].f_hat_oracle = per_h[r][best];
  res.rmse_scv = rmse_of([&](std::size_t r) { return res.rows[r].f_hat_scv; });
  std::size_t interior = 0;
  for (const auto& row : res.rows) interior += row.interior ? 1 : 0;
  res.interior_fraction = static_cast<double>(interior) / static_cast<double>(reps);
  return res;
}

// ---------------------------------------------------------------- likelihood

LikelihoodStudyResult likelihood_study(const StudyConfig& cfg) {
  cfg.validate();
  LikelihoodStudyResult res;
  for (std::size_t s = 0; s < cfg.horizons.size(); ++s) {
    const double t = cfg.horizons[s];
    PerturbationSpec spec;
    spec.base = cfg.f;
    spec.center = cfg.points.front();
    spec.amplitude = cfg.amplitude;
    spec.horizon = t;
    spec.k_max = cfg.params.k_max;
    const RateFunction f1 = perturb(spec);
    std::vector<double> ll(cfg.replications);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
      const EventLog log = run_one(cfg, t, study_stream(cfg.kind, s, r), cfg.start);
      ll[r] = log_likelihood_ratio(log, f1, cfg.f);
    });
    std::vector<double> ex(ll.size()), ab(ll.size());
    for (std::size_t r = 0; r < ll.size(); ++r) {
      ex[r] = std::exp(ll[r]);
      ab[r] = std::abs(ll[r]);
    }
    LikelihoodRow row;
    row.horizon = t;
    row.h = default_bandwidth(t, cfg.f.holder().beta);
    row.mean_exp = stats::mean(ex);
    row.se_exp = stats::standard_error(ex);
    row.mean_abs = stats::mean(ab);
    row.se_abs = stats::standard_error(ab);
    res.rows.push_back(row);
  }
  return res;
}

// ---------------------------------------------------------------- output

namespace {

class Outputs {
 public:
  Outputs(std::string dir, bool no_clobber) : dir_(std::move(dir)), no_clobber_(no_clobber) {
    std::filesystem::create_directories(dir_);
  }

  std::string path(const std::string& name) {
    const std::string p = (std::filesystem::path(dir_) / name).string();
    if (no_clobber_ && std::filesystem::exists(p))
      throw OutputExistsError("refusing to overwrite existing output " + p);
    return p;
  }

  void write(const std::string& name, const std::string& content) {
    const std::string p = path(name);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + p + " for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing " + p);
    written_.push_back(p);
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  std::string dir_;
  bool no_clobber_;
  std::vector<std::string> written_;
};

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

std::vector<std::string> run_study(const StudyConfig& cfg, const std::string& dir,
                                   bool no_clobber, nlohmann::json* summary_out) {
  const std::string stem = to_string(cfg.kind);
  Outputs out(dir, no_clobber);
  // Check both targets before any work so a refused run leaves nothing behind.
  out.path(stem + ".csv");
  out.path(stem + "_summary.json");
  if (cfg.kind == StudyKind::Scv) out.path("scv_curve.csv");

  nlohmann::json summary;
  summary["study"] = stem;
  summary["seed"] = cfg.seed;
  summary["replications"] = cfg.replications;
  summary["rate"] = cfg.f.descriptor();
  std::string csv;

  switch (cfg.kind) {
    case StudyKind::Rate: {
      const auto res = rate_study(cfg);
      csv = "horizon,a,h,truth,kept,discard_rate,mean_f_hat,bias,rmse,rmse_se\n";
      for (const auto& r : res.rows)
        csv += fmt(r.horizon) + "," + fmt(r.a) + "," + fmt(r.h) + "," + fmt(r.truth) + "," +
               std::to_string(r.kept) + "," + fmt(r.discard_rate) + "," + fmt(r.mean_f_hat) +
               "," + fmt(r.bias) + "," + fmt(r.rmse) + "," + fmt(r.rmse_se) + "\n";
      for (std::size_t p = 0; p < cfg.points.size(); ++p) {
        nlohmann::json e;
        e["a"] = cfg.points[p];
        e["threshold"] = res.thresholds[p];
        e["slope_available"] = static_cast<bool>(res.slope_available[p]);
        e["slope"] = finite_or_null(res.slopes[p]);
        e["slope_se"] = finite_or_null(res.slope_se[p]);
        summary["points"].push_back(e);
      }
      for (const auto& r : res.rows) summary["discard_rates"].push_back(r.discard_rate);
      break;
    }
    case StudyKind::Clt: {
      const auto res = clt_study(cfg);
      csv = "replication_rank,z\n";
      std::vector<double> z = res.standardized;
      std::sort(z.begin(), z.end());
      for (std::size_t k = 0; k < z.size(); ++k) csv += std::to_string(k) + "," + fmt(z[k]) + "\n";
      summary["horizon"] = res.horizon;
      summary["a"] = res.a;
      summary["h"] = res.h;
      summary["dropped"] = res.dropped;
      summary["ks_statistic"] = res.ks_statistic;
      summary["ks_p_value"] = res.ks_p_value;
      summary["mean_z"] = res.mean_z;
      summary["var_z"] = res.var_z;
      break;
    }
    case StudyKind::Ergodic: {
      const auto res = ergodic_study(cfg);
      csv = "time,tv,noise_floor,in_fit\n";
      for (const auto& r : res.rows)
        csv += fmt(r.time) + "," + fmt(r.tv) + "," + fmt(r.noise_floor) + "," +
               (r.in_fit ? "1" : "0") + "\n";
      summary["kappa_hat"] = res.kappa_hat;
      summary["decay_rate"] = res.decay_rate;
      summary["fit_r_squared"] = res.fit_r_squared;
      summary["fit_points"] = res.fit_points;
      summary["monotone"] = res.monotone;
      summary["degenerate"] = res.degenerate;
      break;
    }
    case StudyKind::Exchange: {
      const auto res = exchange_study(cfg);
      csv = "neuron,mean_count,se\n";
      for (std::size_t i = 0; i < res.mean_counts.size(); ++i)
        csv += std::to_string(i) + "," + fmt(res.mean_counts[i]) + "," + fmt(res.count_se[i]) +
               "\n";
      summary["chi_square"] = res.chi_square;
      summary["dof"] = res.dof;
      summary["p_value"] = res.p_value;
      break;
    }
    case StudyKind::JumpChain: {
      const auto res = jump_chain_study(cfg);
      csv = "g,chain_average,weighted_time_average,gap,se\n";
      for (const auto& c : res.comparisons) {
        csv += c.label + "," + fmt(c.chain_average) + "," + fmt(c.weighted_time_average) + "," +
               fmt(c.gap) + "," + fmt(c.se) + "\n";
        nlohmann::json e;
        e["g"] = c.label;
        e["gap"] = c.gap;
        e["se"] = c.se;
        summary["comparisons"].push_back(e);
      }
      summary["jumps"] = res.jumps;
      break;
    }
    case StudyKind::Density: {
      const auto res = invariant_density_study(cfg);
      csv = "a,pi1_hat,in_region,zone\n";
      for (const auto& r : res.rows)
        csv += fmt(r.a) + "," + fmt(r.pi1_hat) + "," + (r.in_region ? "1" : "0") + "," + r.zone +
               "\n";
      summary["mass"] = res.mass;
      summary["min_in_region"] = res.min_in_region;
      summary["positive_on_region"] = res.positive_on_region;
      summary["mean_near_zero"] = res.mean_near_zero;
      summary["mean_in_region"] = res.mean_in_region;
      summary["jumps"] = res.jumps;
      break;
    }
    case StudyKind::Scv: {
      const auto res = scv_study(cfg);
      csv = "replication,jumps,h_hat,interior,f_hat_scv,f_hat_oracle\n";
      for (const auto& r : res.rows)
        csv += std::to_string(r.replication) + "," + std::to_string(r.jumps) + "," +
               fmt(r.h_hat) + "," + (r.interior ? "1" : "0") + "," + fmt(r.f_hat_scv) + "," +
               fmt(r.f_hat_oracle) + "\n";
      std::string curve = "h,scv_score\n";
      for (std::size_t j = 0; j < res.first_curve_h.size(); ++j)
        curve += fmt(res.first_curve_h[j]) + "," + fmt(res.first_curve_score[j]) + "\n";
      out.write("scv_curve.csv", curve);
      summary["a"] = res.a;
      summary["oracle_h"] = res.oracle_h;
      summary["rmse_scv"] = res.rmse_scv;
      summary["rmse_oracle"] = res.rmse_oracle;
      summary["interior_fraction"] = res.interior_fraction;
      break;
    }
    case StudyKind::Likelihood: {
      const auto res = likelihood_study(cfg);
      csv = "horizon,h,mean_exp,se_exp,mean_abs,se_abs\n";
      for (const auto& r : res.rows)
        csv += fmt(r.horizon) + "," + fmt(r.h) + "," + fmt(r.mean_exp) + "," + fmt(r.se_exp) +
               "," + fmt(r.mean_abs) + "," + fmt(r.se_abs) + "\n";
      for (const auto& r : res.rows) {
        nlohmann::json e;
        e["horizon"] = r.horizon;
        e["mean_exp"] = r.mean_exp;
        e["se_exp"] = r.se_exp;
        e["mean_abs"] = r.mean_abs;
        summary["rows"].push_back(e);
      }
      break;
    }
    case StudyKind::Regen: {
      cfg.validate();
      RegenProbeConfig rc;
      rc.epsilon = cfg.epsilon;
      rc.delta_star = cfg.delta_star;
      rc.replications = cfg.replications;
      rc.seed = cfg.seed;
      const auto rep = regen_probe(cfg.params, cfg.f, rc);
      csv = "t_star,freq_event,se_event,freq_ball,se_ball,analytic_bound\n";
      csv += fmt(rep.t_star) + "," + fmt(rep.freq_event) + "," + fmt(rep.se_event) + "," +
             fmt(rep.freq_ball) + "," + fmt(rep.se_ball) + "," + fmt(rep.analytic_bound) + "\n";
      summary["freq_event"] = rep.freq_event;
      summary["se_event"] = rep.se_event;
      summary["freq_ball"] = rep.freq_ball;
      summary["analytic_bound"] = rep.analytic_bound;
      break;
    }
  }

  out.write(stem + ".csv", csv);
  out.write(stem + "_summary.json", summary.dump(2) + "\n");
  if (summary_out) *summary_out = summary;
  return out.written();
}

}  // namespace pdmpnet
