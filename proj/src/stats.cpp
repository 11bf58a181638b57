#include "pdmpnet/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace pdmpnet::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return ss / static_cast<double>(xs.size() - 1);
}

double standard_error(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear fit needs at least two paired points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear fit needs distinct abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - fit.intercept - fit.slope * x[k];
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (x.size() > 2)
    fit.slope_se = std::sqrt(sse / static_cast<double>(x.size() - 2) / sxx);
  return fit;
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.27) return 1.0;
  if (x < 1.0) {
    // Small-x form: sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2)).
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      sum += std::exp(-j * j * pi2 / (8.0 * x * x));
    }
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * sum;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_test_normal(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("KS test needs a sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double cdf = normal_cdf(sample[k]);
    d = std::max({d, (k + 1) / n - cdf, cdf - k / n});
  }
  const double root = std::sqrt(n);
  KsResult res;
  res.statistic = d;
  res.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
  return res;
}

ChiSquareResult chi_square_uniform(std::span<const double> counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi-square needs two or more cells");
  const double expected = mean(counts);
  if (!(expected > 0.0)) throw std::invalid_argument("chi-square needs positive counts");
  ChiSquareResult res;
  for (double c : counts) res.statistic += (c - expected) * (c - expected) / expected;
  res.dof = static_cast<double>(counts.size() - 1);
  const boost::math::chi_squared_distribution<> dist(res.dof);
  res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
  return res;
}

double normal_cdf(double x) {
  return boost::math::cdf(boost::math::normal_distribution<>(), x);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<>(), p);
}

double histogram_tv(std::span<const double> a, std::span<const double> b,
                    double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw std::invalid_argument("invalid histogram binning");
  if (a.empty() || b.empty()) throw std::invalid_argument("histogram needs samples");
  auto fill = [&](std::span<const double> xs) {
    std::vector<double> h(bins, 0.0);
    for (double x : xs) {
      const double u = (x - lo) / (hi - lo) * static_cast<double>(bins);
      const auto k = static_cast<std::size_t>(
          std::clamp(u, 0.0, static_cast<double>(bins) - 1.0));
      h[k] += 1.0;
    }
    for (double& v : h) v /= static_cast<double>(xs.size());
    return h;
  };
  const auto ha = fill(a), hb = fill(b);
  double l1 = 0.0;
  for (std::size_t k = 0; k < bins; ++k) l1 += std::abs(ha[k] - hb[k]);
  return 0.5 * l1;
}

}  // namespace pdmpnet::stats
