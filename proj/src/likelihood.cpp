#include "pdmpnet/likelihood.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pdmpnet/estimator.hpp"

namespace pdmpnet {

double log_likelihood_ratio(const EventLog& log, const RateFunction& f1,
                            const RateFunction& f0, double tol,
                            std::optional<Interval> diff_support) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!diff_support) {
    if (f1.family() == RateFamily::Perturbed && f1.base()->descriptor() == f0.descriptor())
      diff_support = Interval{f1.window_lo(), f1.window_hi()};
    else if (f0.family() == RateFamily::Perturbed &&
             f0.base()->descriptor() == f1.descriptor())
      diff_support = Interval{f0.window_lo(), f0.window_hi()};
  }

  double jump_term = 0.0;
  for (std::size_t k = 0; k < log.jump_count(); ++k) {
    const double y = log.spiking_potential(k);
    if (diff_support && (y < diff_support->lo || y > diff_support->hi)) continue;
    const double v1 = f1(y);
    const double v0 = f0(y);
    if (v1 == v0) continue;
    if (v0 == 0.0)
      throw LikelihoodError("spike at a potential where the reference rate vanishes");
    if (v1 == 0.0) return -std::numeric_limits<double>::infinity();
    jump_term += std::log(v1) - std::log(v0);
  }
  const double occupation = occupation_integral(
      log, [&](double x) { return f1(x) - f0(x); }, diff_support, tol);
  return jump_term - occupation;
}

RateFunction perturb(const PerturbationSpec& spec) {
  const HolderClass& hc = spec.base.holder();
  if (!(spec.amplitude > 0.0)) throw AmplitudeError("perturbation amplitude must be positive");
  const double h = default_bandwidth(spec.horizon, hc.beta);
  // b h^{beta+1} chi_h(x - a) = b h^beta chi((x - a)/h), stored as
  // coef * chi(u) / width with coef = b h^{beta+1}.
  const double coef = spec.amplitude * std::pow(h, hc.beta + 1.0);
  RateFunction ft =
      RateFunction::perturbed(spec.base, spec.center, h, coef, spec.bump, hc);
  const HolderAudit audit = holder_audit(ft, spec.k_max, spec.audit_step);
  if (!audit.passed) {
    std::string why;
    for (const auto& v : audit.violations) why += (why.empty() ? "" : "; ") + v;
    throw AmplitudeError("perturbed rate leaves the Hoelder class (" + why +
                         "); use a smaller amplitude");
  }
  return ft;
}

}  // namespace pdmpnet
