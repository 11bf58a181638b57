#include "pdmpnet/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pdmpnet/quadrature.hpp"

namespace pdmpnet {

namespace {
constexpr std::size_t kMaxDegree = 24;
}  // namespace

KernelSum::KernelSum(std::vector<double> points, const Kernel& q, double h)
    : q_(q), h_(h), reach_(h * q.radius()), points_(std::move(points)) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  std::sort(points_.begin(), points_.end());
  if (!q.polynomial()) return;
  if (q.polynomial()->size() > kMaxDegree + 1) return;
  coeffs_ = *q.polynomial();
  const std::size_t degree = coeffs_.size() - 1;

  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto id = static_cast<long long>(std::floor(points_[i] / reach_));
    if (bucket_ids_.empty() || bucket_ids_.back() != id) {
      bucket_ids_.push_back(id);
      bucket_begin_.push_back(i);
    }
  }
  bucket_begin_.push_back(points_.size());

  prefix_.assign(degree + 1, std::vector<long double>(points_.size() + 1, 0.0L));
  std::size_t bucket = 0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    while (bucket_begin_[bucket + 1] <= i) ++bucket;
    const long double u =
        (static_cast<long double>(points_[i]) -
         static_cast<long double>(bucket_ids_[bucket]) * reach_) / h_;
    long double power = 1.0L;
    for (std::size_t p = 0; p <= degree; ++p) {
      prefix_[p][i + 1] = prefix_[p][i] + power;
      power *= u;
    }
  }
}

double KernelSum::direct(double x, std::size_t b, std::size_t e) const {
  double total = 0.0;
  for (std::size_t i = b; i < e; ++i) total += q_.scaled(x - points_[i], h_);
  return total;
}

double KernelSum::operator()(double x) const {
  const auto first = std::upper_bound(points_.begin(), points_.end(), x - reach_);
  const auto last = std::lower_bound(first, points_.end(), x + reach_);
  const auto b = static_cast<std::size_t>(first - points_.begin());
  const auto e = static_cast<std::size_t>(last - points_.begin());
  if (b >= e) return 0.0;
  if (coeffs_.empty()) return direct(x, b, e);

  const std::size_t degree = coeffs_.size() - 1;
  // Bucket holding point b.
  std::size_t k = static_cast<std::size_t>(
      std::upper_bound(bucket_begin_.begin(), bucket_begin_.end(), b) -
      bucket_begin_.begin()) - 1;
  long double total = 0.0L;
  for (; k + 1 < bucket_begin_.size() && bucket_begin_[k] < e; ++k) {
    const std::size_t lo = std::max(b, bucket_begin_[k]);
    const std::size_t hi = std::min(e, bucket_begin_[k + 1]);
    if (lo >= hi) continue;
    const long double v =
        (static_cast<long double>(x) -
         static_cast<long double>(bucket_ids_[k]) * reach_) / h_;
    long double vpow[kMaxDegree + 1];
    long double sums[kMaxDegree + 1];
    vpow[0] = 1.0L;
    for (std::size_t p = 0; p <= degree; ++p) {
      if (p > 0) vpow[p] = vpow[p - 1] * v;
      sums[p] = prefix_[p][hi] - prefix_[p][lo];
    }
    // sum_z (v - u_z)^j = sum_p C(j, p) v^(j-p) (-1)^p S_p.
    for (std::size_t j = 0; j <= degree; ++j) {
      if (coeffs_[j] == 0.0) continue;
      long double term = 0.0L;
      long double binom = 1.0L;
      for (std::size_t p = 0; p <= j; ++p) {
        const long double signed_sum = (p % 2 == 0) ? sums[p] : -sums[p];
        term += binom * vpow[j - p] * signed_sum;
        binom = binom * static_cast<long double>(j - p) / static_cast<long double>(p + 1);
      }
      total += coeffs_[j] * term;
    }
  }
  return static_cast<double>(total / h_);
}

namespace {

std::vector<double> chain_points(const EventLog& log, std::size_t ell, std::size_t n) {
  if (!(ell < n) || n > log.jump_count())
    throw std::invalid_argument("insufficient jumps for the requested chain range");
  std::vector<double> pts;
  pts.reserve((n - ell) * log.n_neurons());
  for (std::size_t k = ell; k < n; ++k) {
    const auto z = log.pre_state(k);
    pts.insert(pts.end(), z.begin(), z.end());
  }
  return pts;
}

}  // namespace

JumpChainDensity::JumpChainDensity(const EventLog& log, std::size_t ell,
                                   std::size_t n, double h, const Kernel& q)
    : sum_(chain_points(log, ell, n), q, h),
      scale_(1.0 / (static_cast<double>(n - ell) * static_cast<double>(log.n_neurons()))) {}

JumpChainDensity jump_chain_density(const EventLog& log, std::size_t ell,
                                    std::size_t n, double h, const Kernel& q) {
  return JumpChainDensity(log, ell, n, h, q);
}

std::vector<double> ScvConfig::log_grid(double lo, double hi, std::size_t count) {
  if (count == 0 || !(lo > 0.0) || !(hi > 0.0))
    throw std::invalid_argument("bandwidth grid needs positive bounds and count");
  if (lo > hi) std::swap(lo, hi);
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k)
    grid[k] = lo * std::exp(step * static_cast<double>(k));
  grid.back() = hi;
  return grid;
}

ScvConfig ScvConfig::defaults(const EventLog& log) {
  ScvConfig cfg;
  cfg.n = log.jump_count();
  const double n = static_cast<double>(cfg.n);
  cfg.m1 = static_cast<std::size_t>(std::ceil(0.2 * n));
  cfg.m2 = static_cast<std::size_t>(std::ceil(0.4 * n));
  cfg.ell = static_cast<std::size_t>(std::ceil(0.6 * n));
  const double t = log.horizon();
  cfg.grid = log_grid(std::pow(t, -0.5), std::pow(t, -0.125), 32);
  return cfg;
}

void ScvConfig::validate(const EventLog& log) const {
  if (!(1 <= m1 && m1 < m2 && m2 <= ell && ell < n))
    throw std::invalid_argument("SCV splits must satisfy 1 <= m1 < m2 <= ell < n");
  if (n > log.jump_count())
    throw std::invalid_argument("insufficient jumps for the SCV splits");
  if (grid.empty()) throw std::invalid_argument("SCV bandwidth grid is empty");
  for (double h : grid)
    if (!(h > 0.0)) throw std::invalid_argument("SCV bandwidths must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("SCV tolerance must be positive");
}

double scv_score(const EventLog& log, const ScvConfig& cfg, double h,
                 const Kernel& q) {
  cfg.validate(log);
  const JumpChainDensity density(log, cfg.ell, cfg.n, h, q);
  const double k_max = log.params().k_max;
  const int min_panels = std::clamp(
      static_cast<int>(std::ceil(k_max / (h * q.radius()))), 1, kMaxPanels / 4);
  const double square = integrate(
      [&](double x) {
        const double v = density(x);
        return v * v;
      },
      0.0, k_max, cfg.tol, min_panels);

  double cross = 0.0;
  for (std::size_t k = cfg.m1; k < cfg.m2; ++k)
    for (double z : log.pre_state(k)) cross += density(z);
  const double denom =
      static_cast<double>(log.n_neurons()) * static_cast<double>(cfg.m2 - cfg.m1);
  return square - 2.0 * cross / denom;
}

std::size_t argmin_smallest(const std::vector<double>& grid,
                            const std::vector<double>& scores) {
  if (grid.empty() || grid.size() != scores.size())
    throw std::invalid_argument("score curve does not match grid");
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (scores[k] < scores[best] ||
        (scores[k] == scores[best] && grid[k] < grid[best]))
      best = k;
  }
  return best;
}

ScvResult scv_select(const EventLog& log, const ScvConfig& cfg, const Kernel& q) {
  cfg.validate(log);
  ScvResult res;
  res.grid = cfg.grid;
  res.scores.reserve(cfg.grid.size());
  for (double h : cfg.grid) res.scores.push_back(scv_score(log, cfg, h, q));
  res.index = argmin_smallest(res.grid, res.scores);
  res.h_hat = res.grid[res.index];
  return res;
}

}  // namespace pdmpnet
