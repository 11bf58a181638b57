// Small statistics toolkit for the Monte Carlo studies.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pdmpnet::stats {

double mean(std::span<const double> xs);
/// Unbiased sample variance; 0 for fewer than two values.
double variance(std::span<const double> xs);
/// Standard error of the mean.
double standard_error(std::span<const double> xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_se = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against N(0, 1). The p-value uses the
/// asymptotic Kolmogorov law with Stephens' small-sample correction.
KsResult ks_test_normal(std::vector<double> sample);

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_survival(double x);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

/// Goodness of fit of counts against equal expected frequencies.
ChiSquareResult chi_square_uniform(std::span<const double> counts);

double normal_cdf(double x);
double normal_quantile(double p);

/// Half of the L1 distance between two histograms of the samples on
/// [lo, hi] with `bins` equal bins.
double histogram_tv(std::span<const double> a, std::span<const double> b,
                    double lo, double hi, std::size_t bins);

}  // namespace pdmpnet::stats
