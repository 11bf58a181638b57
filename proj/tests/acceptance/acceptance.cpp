// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// zero only when every criterion passes. `acceptance 3 7` runs a subset.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pdmpnet/estimator.hpp"
#include "pdmpnet/experiments.hpp"
#include "pdmpnet/simulator.hpp"
#include "pdmpnet/stats.hpp"

using namespace pdmpnet;

namespace {

// Pinned tolerances.
constexpr double kCompensatorSe = 3.0;         // 1
constexpr double kSlopeLo = -0.50;             // 3
constexpr double kSlopeHi = -0.15;
constexpr double kKsLevel = 0.01;              // 4
constexpr double kMassTol = 1e-10;             // 5
constexpr double kMomentTol = 1e-8;
constexpr double kLikelihoodSe = 3.0;          // 6
constexpr double kLikelihoodSpread = 2.0;
constexpr double kTvTarget = 0.05;             // 7
constexpr double kTvTime = 20.0;
constexpr double kFitR2 = 0.8;
constexpr double kJumpChainSe = 3.0;           // 8
constexpr double kDensityMassTol = 0.02;       // 9
constexpr double kScvRmseFactor = 2.0;         // 10
constexpr double kRegenSe = 3.0;               // 11

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t threads() { return std::max(1u, std::thread::hardware_concurrency()); }

HolderClass id_class() { return HolderClass{1.0, 2.5, 1.5, 1.0}; }

ModelParams paper_params() { return ModelParams::make(100, 1.0, 1.0, 2.0); }

StudyConfig paper_study(StudyKind kind) {
  StudyConfig cfg;
  cfg.kind = kind;
  cfg.params = paper_params();
  cfg.f = RateFunction::linear(1.0, id_class());
  cfg.points = {0.5};
  cfg.seed = kSeed;
  cfg.threads = threads();
  return cfg;
}

// ---------------------------------------------------------------------------

Outcome compensator() {
  const auto p = ModelParams::make(5, 1.0, 1.0, 2.0);
  const auto f = RateFunction::linear(1.0, id_class());
  std::vector<double> counts, comps;
  for (std::uint64_t r = 0; r < 200; ++r) {
    SimConfig sim;
    sim.horizon = 100.0;
    sim.seed = kSeed;
    sim.stream = r;
    const auto log = simulate(p, f, sim);
    // For f = Id the integral of sum_i X^i over a segment is closed form.
    double comp = 0.0;
    log.for_each_segment([&](double, double d, std::span<const double> s, std::span<const double>) {
      for (double x : s) comp += p.m * d + (x - p.m) * (1.0 - std::exp(-p.lambda * d)) / p.lambda;
    });
    counts.push_back(static_cast<double>(log.jump_count()));
    comps.push_back(comp);
  }
  const double gap = stats::mean(counts) - stats::mean(comps);
  const double se = std::hypot(stats::standard_error(counts), stats::standard_error(comps));
  return {std::abs(gap) <= kCompensatorSe * se,
          fmt("mean count %.3f, mean compensator %.3f, gap %.3f, pooled SE %.3f", stats::mean(counts),
              stats::mean(comps), gap, se)};
}

Outcome time_rescaling() {
  const HolderClass wide{1.0, 5.0, 3.0, 1.0};
  std::size_t compared = 0;
  for (std::size_t n : {5u, 100u}) {
    const auto p1 = ModelParams::make(n, 1.0, 1.0, 2.0);
    const auto p2 = ModelParams::make(n, 2.0, 1.0, 2.0);
    SimConfig s1, s2;
    s1.horizon = n == 5 ? 200.0 : 40.0;
    s2.horizon = s1.horizon / 2.0;
    s1.seed = s2.seed = kSeed;
    s1.stream = s2.stream = 7;
    const auto a = simulate(p1, RateFunction::linear(1.0, wide), s1);
    const auto b = simulate(p2, RateFunction::linear(2.0, wide), s2);
    if (a.jump_count() != b.jump_count())
      return {false, fmt("N=%zu: jump counts differ (%zu vs %zu)", n, a.jump_count(), b.jump_count())};
    for (std::size_t k = 0; k < a.jump_count(); ++k) {
      if (b.time(k) != a.time(k) / 2.0 || b.index(k) != a.index(k))
        return {false, fmt("N=%zu: jump %zu differs", n, k)};
      const auto za = a.pre_state(k), zb = b.pre_state(k);
      for (std::size_t i = 0; i < n; ++i)
        if (za[i] != zb[i]) return {false, fmt("N=%zu: pre-jump state %zu differs", n, k)};
    }
    compared += a.jump_count();
  }
  return {true, fmt("%zu jumps bit-identical, times halved exactly", compared)};
}

Outcome rate_reproduction() {
  auto cfg = paper_study(StudyKind::Rate);
  cfg.horizons = {50.0, 100.0, 200.0, 400.0};
  cfg.replications = 50;
  const auto res = rate_study(cfg);
  std::string rows;
  for (const auto& r : res.rows) rows += fmt(" t=%g:rmse=%.4f(kept %zu)", r.horizon, r.rmse, r.kept);
  if (!res.slope_available[0]) return {false, "slope unavailable;" + rows};
  const double slope = res.slopes[0];
  return {slope >= kSlopeLo && slope <= kSlopeHi,
          fmt("slope %.3f (SE %.3f), band [%.2f, %.2f];", slope, res.slope_se[0], kSlopeLo, kSlopeHi) +
              rows};
}

Outcome clt() {
  auto cfg = paper_study(StudyKind::Clt);
  cfg.horizons = {400.0};
  cfg.replications = 200;
  cfg.bandwidth_exponent = 0.45;
  const auto res = clt_study(cfg);
  return {res.ks_p_value > kKsLevel,
          fmt("KS D=%.4f p=%.3f, mean z %.3f, var z %.3f, dropped %zu", res.ks_statistic,
              res.ks_p_value, res.mean_z, res.var_z, res.dropped)};
}

Outcome kernel_moments() {
  std::vector<Kernel> kernels;
  for (double r : {1.0, 2.0}) {
    kernels.push_back(Kernel::make(KernelFamily::Epanechnikov, r, 1));
    kernels.push_back(Kernel::make(KernelFamily::Uniform, r, 1));
  }
  kernels.push_back(Kernel::make(KernelFamily::TruncGaussian, 1.0, 1));
  kernels.push_back(Kernel::make(KernelFamily::TruncGaussian, 3.0, 1));
  for (auto base : {KernelFamily::Epanechnikov, KernelFamily::TruncGaussian, KernelFamily::Uniform})
    for (int order = 0; order <= 10; ++order)
      kernels.push_back(Kernel::make(KernelFamily::HighOrder, 1.0, order, base));

  double worst_mass = 0.0, worst_moment = 0.0;
  std::string worst;
  for (const auto& q : kernels) {
    const double r = q.radius();
    auto moment = [&](int j) {
      return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double y) { return std::pow(y, j) * q(y); }, -r, r, 8, 1e-13);
    };
    worst_mass = std::max(worst_mass, std::abs(moment(0) - 1.0));
    for (int j = 1; j <= std::max(1, q.order()); ++j) {
      const double v = std::abs(moment(j));
      if (v > worst_moment) worst_moment = v, worst = q.descriptor();
    }
  }
  return {worst_mass <= kMassTol && worst_moment <= kMomentTol,
          fmt("%zu kernels, max |int Q - 1| = %.2e, max |moment| = %.2e (%s)", kernels.size(),
              worst_mass, worst_moment, worst.c_str())};
}

Outcome likelihood() {
  auto cfg = paper_study(StudyKind::Likelihood);
  cfg.amplitude = 0.1;
  cfg.horizons = {10.0};
  cfg.replications = 500;
  const auto norm = likelihood_study(cfg).rows.at(0);
  const bool normalized = std::abs(norm.mean_exp - 1.0) <= kLikelihoodSe * norm.se_exp;

  cfg.horizons = {10.0, 20.0, 40.0};
  cfg.replications = 200;
  const auto trend = likelihood_study(cfg);
  double lo = INFINITY, hi = 0.0;
  std::string rows;
  for (const auto& r : trend.rows) {
    lo = std::min(lo, r.mean_abs);
    hi = std::max(hi, r.mean_abs);
    rows += fmt(" t=%g:%.3f(%.3f)", r.horizon, r.mean_abs, r.se_abs);
  }
  const bool bounded = std::isfinite(hi) && lo > 0.0 && hi / lo <= kLikelihoodSpread;
  return {normalized && bounded,
          fmt("E exp(logL) = %.4f (SE %.4f); E|logL|:", norm.mean_exp, norm.se_exp) + rows +
              fmt("; max/min %.2f", hi / lo)};
}

Outcome ergodicity() {
  auto cfg = paper_study(StudyKind::Ergodic);
  cfg.times = {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0};
  cfg.replications = 200;
  cfg.bins = 64;
  const auto res = ergodic_study(cfg);
  double tv_at = NAN;
  for (const auto& r : res.rows)
    if (r.time == kTvTime) tv_at = r.tv;
  double first_below = NAN;
  for (const auto& r : res.rows)
    if (r.tv < kTvTarget) {
      first_below = r.time;
      break;
    }
  return {tv_at < kTvTarget && res.fit_r_squared >= kFitR2 && res.fit_points >= 3,
          fmt("TV(t=20) = %.4f, first below %.2f at t=%g, decay rate %.3f, R^2 %.3f on %zu points, "
              "monotone %s",
              tv_at, kTvTarget, first_below, res.decay_rate, res.fit_r_squared, res.fit_points,
              res.monotone ? "yes" : "no")};
}

Outcome jump_chain() {
  auto cfg = paper_study(StudyKind::JumpChain);
  cfg.horizons = {500.0};
  cfg.powers = {1, 2};
  cfg.batches = 25;
  const auto res = jump_chain_study(cfg);
  bool ok = true;
  std::string detail = fmt("%zu jumps;", res.jumps);
  for (const auto& c : res.comparisons) {
    ok = ok && std::abs(c.gap) <= kJumpChainSe * c.se;
    detail += fmt(" %s: chain %.5f vs weighted %.5f, gap %.5f (SE %.5f);", c.label.c_str(),
                  c.chain_average, c.weighted_time_average, c.gap, c.se);
  }
  return {ok, detail};
}

Outcome invariant_density() {
  auto cfg = paper_study(StudyKind::Density);
  cfg.horizons = {200.0};
  cfg.grid_step = 0.01;
  cfg.density_h = 0.02;
  const auto res = invariant_density_study(cfg);
  const bool mass_ok = std::abs(res.mass - 1.0) <= kDensityMassTol;
  const bool spike = res.mean_near_zero > res.mean_in_region;
  return {res.positive_on_region && mass_ok && spike,
          fmt("positive on region %s (min %.4f); mass %.4f; mean density on [0, 0.1] %.4f vs "
              "region mean %.4f (concentration near 0: %s)",
              res.positive_on_region ? "yes" : "no", res.min_in_region, res.mass,
              res.mean_near_zero, res.mean_in_region, spike ? "yes" : "no")};
}

Outcome scv() {
  auto cfg = paper_study(StudyKind::Scv);
  cfg.horizons = {200.0};
  cfg.replications = 10;
  const auto res = scv_study(cfg);
  const auto& first = res.rows.at(0);
  const bool rmse_ok = res.rmse_scv <= kScvRmseFactor * res.rmse_oracle;
  return {first.interior && rmse_ok,
          fmt("jumps %zu, h_hat %.4f (grid [%.4f, %.4f], interior %s, interior fraction %.2f); "
              "RMSE scv %.4f vs oracle %.4f at h=%.4f (ratio %.2f)",
              first.jumps, first.h_hat, res.first_curve_h.front(), res.first_curve_h.back(),
              first.interior ? "yes" : "no", res.interior_fraction, res.rmse_scv, res.rmse_oracle,
              res.oracle_h, res.rmse_scv / res.rmse_oracle)};
}

Outcome regeneration() {
  const auto p = ModelParams::make(3, 1.0, 1.0, 2.0);
  const auto f = RateFunction::linear(1.0, HolderClass{1.0, 2.0, 1.0, 1.0});
  RegenProbeConfig cfg;
  cfg.epsilon = 0.2;
  cfg.delta_star = 0.25;
  cfg.replications = 200000;
  cfg.seed = kSeed;
  const auto rep = regen_probe(p, f, cfg);
  return {rep.freq_event >= rep.analytic_bound - kRegenSe * rep.se_event,
          fmt("P(A_eps and S) = %.3e (SE %.1e) vs bound %.3e; ball frequency %.4f", rep.freq_event,
              rep.se_event, rep.analytic_bound, rep.freq_ball)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "compensator identity", compensator},
      {2, "time-rescaling exactness", time_rescaling},
      {3, "rate reproduction", rate_reproduction},
      {4, "central limit theorem", clt},
      {5, "kernel moments", kernel_moments},
      {6, "likelihood normalization", likelihood},
      {7, "ergodicity probe", ergodicity},
      {8, "jump-chain identity", jump_chain},
      {9, "invariant density", invariant_density},
      {10, "scv sanity", scv},
      {11, "regeneration probe", regeneration},
  };
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %-26s %s  %s [%.1f s]\n", c.id, c.name, out.pass ? "PASS" : "FAIL",
                out.detail.c_str(), secs);
    std::fflush(stdout);
    failed += out.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
