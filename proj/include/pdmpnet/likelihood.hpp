// Log-likelihood ratios between rate functions on an observed trajectory,
// and the localized perturbations used in two-point comparisons.
#pragma once

#include <functional>
#include <optional>
#include <stdexcept>

#include "pdmpnet/flow.hpp"
#include "pdmpnet/model.hpp"
#include "pdmpnet/simulator.hpp"

namespace pdmpnet {

class LikelihoodError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class AmplitudeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// log dP^{f1}/dP^{f0} on the observation window of `log`:
///   sum over spikes of log(f1/f0)(pre-spike potential of the spiking neuron)
///   - sum_i int_0^t (f1 - f0)(X^i_s) ds.
/// `diff_support`, when given, must contain every point where f1 != f0; the
/// occupation integral is then restricted to it. A perturbed f1 built on f0
/// supplies its own window automatically.
double log_likelihood_ratio(const EventLog& log, const RateFunction& f1,
                            const RateFunction& f0, double tol = 1e-9,
                            std::optional<Interval> diff_support = std::nullopt);

struct PerturbationSpec {
  RateFunction base;
  double center = 0.0;
  double amplitude = 0.1;  // b
  double horizon = 1.0;    // t, fixing h_t = t^{-1/(2 beta + 1)}
  std::function<double(double)> bump = default_bump;
  /// Audit grid step on [0, K].
  double audit_step = 1e-3;
  double k_max = 2.0;
};

/// f_t(x) = f0(x) + b h_t^{beta+1} chi_{h_t}(x - a), chi_h(x) = chi(x/h)/h,
/// with beta and the class taken from the base rate. Throws AmplitudeError
/// when the result fails the Hoelder audit.
RateFunction perturb(const PerturbationSpec& spec);

}  // namespace pdmpnet
