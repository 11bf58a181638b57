// Kernel estimator of the spiking rate: smoothed spike counts divided by
// smoothed occupation time.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdmpnet/flow.hpp"
#include "pdmpnet/kernel.hpp"
#include "pdmpnet/simulator.hpp"

namespace pdmpnet {

inline constexpr double kDefaultOccupationTol = 1e-8;

struct EstimateReport {
  double a = 0.0;
  double h = 0.0;
  double horizon = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  double f_hat = 0.0;
  double pi1_hat = 0.0;
  double r = 0.0;
  bool a_tr_satisfied = false;
  double level = 0.95;
  double ci_halfwidth = 0.0;

  double ci_low() const { return f_hat - ci_halfwidth; }
  double ci_high() const { return f_hat + ci_halfwidth; }
};

inline constexpr const char* kEstimateCsvHeader =
    "a,h,t,numerator,denominator,f_hat,pi1_hat,a_tr,ci_low,ci_high";
std::string to_csv_row(const EstimateReport& report);

/// sum_i int_0^t g(X^i_s) ds over every neuron and inter-jump segment,
/// integrating only while the flow lies in `support`. The quadrature budget
/// `tol` is shared across all contributing segments.
double occupation_integral(const EventLog& log,
                           const std::function<double(double)>& g,
                           std::optional<Interval> support, double tol);

/// sum over spikes of Q_h(pre-spike potential of the spiking neuron - a).
double numerator(const EventLog& log, double a, double h, const Kernel& q);

/// sum_i int_0^t Q_h(X^i_s - a) ds.
double denominator(const EventLog& log, double a, double h, const Kernel& q,
                   double tol = kDefaultOccupationTol);

/// Full report at a. f_hat uses 0/0 := 0, pi1_hat = denominator / (N t),
/// the admissibility event compares pi1_hat with r, and the interval is the
/// plug-in normal interval with variance f_hat int Q^2 / (N pi1_hat t h).
EstimateReport estimate_at(const EventLog& log, double a, double h,
                           const Kernel& q, double r, double level = 0.95,
                           double tol = kDefaultOccupationTol);

/// h_t = t^{-1/(2 beta + 1)}.
double default_bandwidth(double t, double beta);

/// a in S_{d,beta} with an admissible exclusion radius d.
bool region_check(double a, const ModelParams& params, const HolderClass& holder,
                  double d);

/// Default admissibility threshold: half the occupation density estimate at
/// a computed on the leading `fraction` of the log.
double pilot_threshold(const EventLog& log, double a, double h, const Kernel& q,
                       double fraction = 0.25, double tol = kDefaultOccupationTol);

/// Occupation density estimate denominator(a) / (N t) on every grid point,
/// computed in one pass over the log.
std::vector<double> occupation_density(const EventLog& log,
                                       const std::vector<double>& grid, double h,
                                       const Kernel& q,
                                       double tol = kDefaultOccupationTol);

}  // namespace pdmpnet
