// Monte Carlo studies that check the estimator and the process against
// their asymptotic theory at desk scale.
#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "pdmpnet/bandwidth.hpp"
#include "pdmpnet/estimator.hpp"
#include "pdmpnet/kernel.hpp"
#include "pdmpnet/model.hpp"
#include "pdmpnet/simulator.hpp"

namespace pdmpnet {

enum class StudyKind { Rate, Clt, Ergodic, Exchange, JumpChain, Density, Scv, Likelihood, Regen };

std::string to_string(StudyKind kind);
StudyKind study_kind_from_string(const std::string& name);

struct KernelSpec {
  KernelFamily family = KernelFamily::Epanechnikov;
  double radius = 1.0;
  int order = 1;
  KernelFamily base = KernelFamily::Epanechnikov;

  Kernel build() const { return Kernel::make(family, radius, order, base); }
  /// Epanechnikov when floor(beta) <= 1, otherwise a high-order kernel on
  /// an Epanechnikov base cancelling moments up to floor(beta).
  static KernelSpec default_for(double beta);
};

struct StudyConfig {
  StudyKind kind = StudyKind::Rate;
  ModelParams params;
  RateFunction f;
  KernelSpec kernel;
  std::vector<double> horizons;
  std::size_t replications = 1;
  std::vector<double> points;
  double region_d = 0.05;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  InitialPolicy start = InitialPolicy::AllAtM;

  // Clt: h = t^{-bandwidth_exponent}, must exceed 1/(2 beta + 1).
  double bandwidth_exponent = 0.45;
  // Ergodic: two starts compared on a time grid with `bins` histogram bins.
  // Start A follows `start_a` (explicit uses start_a_state); start B is
  // start_b_state, all-at-K when empty.
  InitialPolicy start_a = InitialPolicy::AllAtZero;
  std::vector<double> start_a_state;
  std::vector<double> start_b_state;
  std::vector<double> times;
  std::size_t bins = 64;
  // JumpChain: powers p of g(x) = (x^1)^p; Density: grid step and bandwidth.
  std::vector<int> powers{1, 2};
  double grid_step = 0.01;
  double density_h = 0.02;
  std::size_t batches = 25;
  // Likelihood: perturbation amplitude.
  double amplitude = 0.1;
  // Regen: epsilon and ball radius.
  double epsilon = 0.2;
  double delta_star = 0.25;

  /// Checks counts and that every evaluation point lies in S_{d,beta}.
  void validate() const;
};

/// Runs fn(r) for r in [0, count) over `threads` workers.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

/// Stream index for replication r of horizon slot s in a study.
std::uint64_t study_stream(StudyKind kind, std::size_t slot, std::size_t r);

// ---------------------------------------------------------------- rate

struct RateRow {
  double horizon = 0.0;
  double a = 0.0;
  double h = 0.0;
  double truth = 0.0;
  std::size_t kept = 0;
  double discard_rate = 0.0;
  double mean_f_hat = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double rmse_se = 0.0;
};

struct RateStudyResult {
  std::vector<RateRow> rows;
  std::vector<double> thresholds;   // r per evaluation point
  std::vector<double> slopes;       // fitted log-log slope per point
  std::vector<double> slope_se;
  std::vector<bool> slope_available;
};

RateStudyResult rate_study(const StudyConfig& cfg);

// ---------------------------------------------------------------- clt

struct CltStudyResult {
  double horizon = 0.0;
  double a = 0.0;
  double h = 0.0;
  std::vector<double> standardized;
  std::size_t dropped = 0;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  double mean_z = 0.0;
  double var_z = 0.0;
};

CltStudyResult clt_study(const StudyConfig& cfg);

// ---------------------------------------------------------------- ergodic

struct ErgodicRow {
  double time = 0.0;
  double tv = 0.0;
  double noise_floor = 0.0;
  bool in_fit = false;
};

struct ErgodicStudyResult {
  std::vector<ErgodicRow> rows;
  double kappa_hat = 0.0;
  double decay_rate = 0.0;
  double fit_r_squared = 0.0;
  std::size_t fit_points = 0;
  bool monotone = true;
  bool degenerate = false;
};

ErgodicStudyResult ergodic_study(const StudyConfig& cfg);

// ---------------------------------------------------------------- exchange

struct ExchangeStudyResult {
  std::vector<double> mean_counts;
  std::vector<double> count_se;
  double chi_square = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

ExchangeStudyResult exchange_study(const StudyConfig& cfg);

// ---------------------------------------------------------------- jump chain

struct JumpChainComparison {
  std::string label;
  double chain_average = 0.0;
  double weighted_time_average = 0.0;
  double gap = 0.0;
  double se = 0.0;
};

/// Compares (1/n) sum_k g(Z_k) with int fbar g ds / int fbar ds on one log,
/// with batch-means standard errors over `batches` blocks of jumps.
JumpChainComparison jump_chain_compare(const EventLog& log, const RateFunction& f,
                                       const std::function<double(std::span<const double>)>& g,
                                       std::size_t batches, double tol = 1e-10);

struct JumpChainStudyResult {
  std::size_t jumps = 0;
  std::vector<JumpChainComparison> comparisons;
};

JumpChainStudyResult jump_chain_study(const StudyConfig& cfg);

// ---------------------------------------------------------------- density

struct DensityRow {
  double a = 0.0;
  double pi1_hat = 0.0;
  bool in_region = false;
  std::string zone;  // "zero", "m", "K" near the excluded spots, else "interior"
};

struct DensityStudyResult {
  std::vector<DensityRow> rows;
  double mass = 0.0;
  double min_in_region = 0.0;
  bool positive_on_region = false;
  double mean_near_zero = 0.0;    // average pi1_hat on [0, 0.1]
  double mean_in_region = 0.0;    // average pi1_hat over the region grid
  std::size_t jumps = 0;
};

DensityStudyResult invariant_density_study(const StudyConfig& cfg);

// ---------------------------------------------------------------- scv

struct ScvRow {
  std::size_t replication = 0;
  std::size_t jumps = 0;
  double h_hat = 0.0;
  bool interior = false;
  double f_hat_scv = 0.0;
  double f_hat_oracle = 0.0;
};

struct ScvStudyResult {
  double a = 0.0;
  double truth = 0.0;
  double oracle_h = 0.0;
  std::vector<ScvRow> rows;
  std::vector<double> first_curve_h;
  std::vector<double> first_curve_score;
  double rmse_scv = 0.0;
  double rmse_oracle = 0.0;
  double interior_fraction = 0.0;
};

ScvStudyResult scv_study(const StudyConfig& cfg);

// ---------------------------------------------------------------- likelihood

struct LikelihoodRow {
  double horizon = 0.0;
  double h = 0.0;
  double mean_exp = 0.0;
  double se_exp = 0.0;
  double mean_abs = 0.0;
  double se_abs = 0.0;
};

struct LikelihoodStudyResult {
  std::vector<LikelihoodRow> rows;
};

LikelihoodStudyResult likelihood_study(const StudyConfig& cfg);

// ---------------------------------------------------------------- output

class OutputExistsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes the study tables as CSV and a JSON summary into `dir`; returns
/// the written paths. With `no_clobber`, throws OutputExistsError
/// before any work when a target already exists.
std::vector<std::string> run_study(const StudyConfig& cfg, const std::string& dir,
                                   bool no_clobber, nlohmann::json* summary_out = nullptr);

}  // namespace pdmpnet
