#include "pdmpnet/estimator.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pdmpnet/quadrature.hpp"

namespace pdmpnet {

namespace {

bool overlaps(double x0, double x1, Interval window) {
  return std::max(x0, x1) >= window.lo && std::min(x0, x1) <= window.hi;
}

// Calls fn(x_start, duration) for every neuron-segment whose potential
// range meets `window` (or every neuron-segment without a window).
template <class Fn>
void for_each_neuron_segment(const EventLog& log, std::optional<Interval> window,
                             Fn&& fn) {
  log.for_each_segment([&](double, double duration, std::span<const double> start,
                           std::span<const double> end) {
    if (!(duration > 0.0)) return;
    for (std::size_t i = 0; i < start.size(); ++i) {
      if (window && !overlaps(start[i], end[i], *window)) continue;
      fn(start[i], duration);
    }
  });
}

}  // namespace

double occupation_integral(const EventLog& log,
                           const std::function<double(double)>& g,
                           std::optional<Interval> support, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const ModelParams& params = log.params();
  std::size_t pieces = 0;
  for_each_neuron_segment(log, support, [&](double, double) { ++pieces; });
  if (pieces == 0) return 0.0;
  const double piece_tol = tol / static_cast<double>(pieces);
  double total = 0.0;
  for_each_neuron_segment(log, support, [&](double x, double duration) {
    total += segment_integral(g, x, duration, params, piece_tol, support);
  });
  return total;
}

double numerator(const EventLog& log, double a, double h, const Kernel& q) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  double total = 0.0;
  for (std::size_t k = 0; k < log.jump_count(); ++k)
    total += q.scaled(log.spiking_potential(k) - a, h);
  return total;
}

double denominator(const EventLog& log, double a, double h, const Kernel& q,
                   double tol) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  const double reach = h * q.radius();
  return occupation_integral(
      log, [&](double x) { return q.scaled(x - a, h); },
      Interval{a - reach, a + reach}, tol);
}

EstimateReport estimate_at(const EventLog& log, double a, double h,
                           const Kernel& q, double r, double level, double tol) {
  if (!(a >= 0.0 && a <= log.params().k_max))
    throw std::invalid_argument("evaluation point outside [0, K]");
  if (!(r >= 0.0)) throw std::invalid_argument("threshold r must be non-negative");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0, 1)");
  EstimateReport rep;
  rep.a = a;
  rep.h = h;
  rep.horizon = log.horizon();
  rep.r = r;
  rep.level = level;
  rep.numerator = numerator(log, a, h, q);
  rep.denominator = denominator(log, a, h, q, tol);
  rep.f_hat = rep.denominator == 0.0 ? 0.0 : rep.numerator / rep.denominator;
  const double nt = static_cast<double>(log.n_neurons()) * log.horizon();
  rep.pi1_hat = rep.denominator / nt;
  rep.a_tr_satisfied = rep.pi1_hat >= r;
  if (rep.pi1_hat > 0.0) {
    const boost::math::normal_distribution<> standard;
    const double z = boost::math::quantile(standard, 0.5 + 0.5 * level);
    rep.ci_halfwidth = z * std::sqrt(rep.f_hat * q.integral_sq() / (nt * rep.pi1_hat * h));
  } else {
    rep.ci_halfwidth = std::numeric_limits<double>::infinity();
  }
  return rep;
}

std::string to_csv_row(const EstimateReport& rep) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g",
                rep.a, rep.h, rep.horizon, rep.numerator, rep.denominator, rep.f_hat,
                rep.pi1_hat, rep.a_tr_satisfied ? 1 : 0, rep.ci_low(), rep.ci_high());
  return buf;
}

double default_bandwidth(double t, double beta) {
  if (!(t > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("bandwidth needs t > 0 and beta > 0");
  return std::pow(t, -1.0 / (2.0 * beta + 1.0));
}

bool region_check(double a, const ModelParams& params, const HolderClass& holder,
                  double d) {
  const EstimationRegion region(params, holder, d);
  return region.radius_admissible() && region.contains(a);
}

double pilot_threshold(const EventLog& log, double a, double h, const Kernel& q,
                       double fraction, double tol) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("pilot fraction must be in (0, 1]");
  const EventLog burn_in = log.prefix(fraction * log.horizon());
  const double nt = static_cast<double>(burn_in.n_neurons()) * burn_in.horizon();
  return 0.5 * denominator(burn_in, a, h, q, tol) / nt;
}

std::vector<double> occupation_density(const EventLog& log,
                                       const std::vector<double>& grid, double h,
                                       const Kernel& q, double tol) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("density grid must be sorted");
  const ModelParams& params = log.params();
  const double reach = h * q.radius();
  std::vector<double> out(grid.size(), 0.0);
  if (grid.empty()) return out;

  auto grid_range = [&](double x0, double x1) {
    const double lo = std::min(x0, x1) - reach;
    const double hi = std::max(x0, x1) + reach;
    const auto b = std::lower_bound(grid.begin(), grid.end(), lo);
    const auto e = std::upper_bound(b, grid.end(), hi);
    return std::make_pair(static_cast<std::size_t>(b - grid.begin()),
                          static_cast<std::size_t>(e - grid.begin()));
  };

  std::size_t pieces = 0;
  log.for_each_segment([&](double, double duration, std::span<const double> start,
                           std::span<const double> end) {
    if (!(duration > 0.0)) return;
    for (std::size_t i = 0; i < start.size(); ++i) {
      const auto [b, e] = grid_range(start[i], end[i]);
      pieces += e - b;
    }
  });
  if (pieces == 0) return out;
  const double piece_tol = tol / static_cast<double>(pieces);

  log.for_each_segment([&](double, double duration, std::span<const double> start,
                           std::span<const double> end) {
    if (!(duration > 0.0)) return;
    for (std::size_t i = 0; i < start.size(); ++i) {
      const auto [b, e] = grid_range(start[i], end[i]);
      for (std::size_t g = b; g < e; ++g) {
        const double a = grid[g];
        out[g] += segment_integral([&](double x) { return q.scaled(x - a, h); },
                                   start[i], duration, params, piece_tol,
                                   Interval{a - reach, a + reach});
      }
    }
  });
  const double nt = static_cast<double>(log.n_neurons()) * log.horizon();
  for (double& v : out) v /= nt;
  return out;
}

}  // namespace pdmpnet
