// Network parameters, spiking-rate functions and the spike transition of
// the interacting-neuron PDMP.
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdmpnet {

/// Raised when a parameter set or function violates its model contract.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Kick received by a neuron when another neuron spikes.
///
/// a_K(x) = (1/N) * s(u), u = clamp(N (K - x) / 2, 0, 1), s(u) = u^2 (3 - 2u).
/// It equals 1/N below K - 2/N, decreases smoothly to 0 at K, and satisfies
/// x + a_K(x) <= K on [0, K].
class SoftCap {
 public:
  SoftCap() = default;
  SoftCap(std::size_t n_neurons, double k_max);

  double operator()(double x) const;

  std::size_t n_neurons() const { return n_; }
  double k_max() const { return k_max_; }

 private:
  std::size_t n_ = 1;
  double k_max_ = 1.0;
};

struct ModelParams {
  std::size_t n_neurons = 0;
  double lambda = 1.0;
  double m = 1.0;
  double k_max = 2.0;
  SoftCap cap;

  /// Validates the standing assumptions and builds the soft cap.
  static ModelParams make(std::size_t n_neurons, double lambda, double m,
                          double k_max);

  void validate() const;
};

/// Smoothness class H(beta, F, L, f_min): |f^(l)| <= F for l <= floor(beta),
/// Hoelder constant L on f^(floor(beta)) with exponent beta - floor(beta),
/// and f >= f_min.
struct HolderClass {
  double beta = 1.0;
  double sup_bound = 1.0;
  double holder_const = 1.0;
  /// Lower envelope f_min(x) = fmin_slope * x.
  double fmin_slope = 0.0;

  int order() const;
  double alpha() const;
  double f_min(double x) const { return fmin_slope * x; }
  void validate() const;
};

enum class RateFamily { Linear, Log1p, ExpM1, UserTable, Perturbed };

std::string to_string(RateFamily family);

/// Compactly supported bump used to perturb a rate function.
/// chi(u) = (1 - u^2)^2 on [-1, 1].
double default_bump(double u);

/// Evaluatable spiking rate f on [0, K] together with its declared class.
///
/// Linear, Log1p and ExpM1 are scale * {x, log(1+x), e^x - 1}. UserTable is
/// the piecewise-linear interpolant of (x, f(x)) knots, constant beyond the
/// last knot. Perturbed adds coef * chi((x - center) / width) / width to a
/// base rate.
class RateFunction {
 public:
  static RateFunction linear(double scale, HolderClass holder);
  static RateFunction log1p(double scale, HolderClass holder);
  static RateFunction expm1(double scale, HolderClass holder);
  /// Knots must start at x = 0 with f = 0 and be non-decreasing in f.
  static RateFunction table(std::vector<double> xs, std::vector<double> ys,
                            HolderClass holder);
  /// Two-column CSV `x,f` with an optional header line.
  static RateFunction table_from_csv(const std::string& path,
                                     HolderClass holder);
  static RateFunction perturbed(const RateFunction& base, double center,
                                double width, double coef,
                                std::function<double(double)> bump,
                                HolderClass holder);

  /// Identity rate with the default class.
  RateFunction() = default;

  double operator()(double x) const;

  RateFamily family() const { return family_; }
  double scale() const { return scale_; }
  const HolderClass& holder() const { return holder_; }

  /// Interval outside of which a perturbed rate equals its base.
  /// Only meaningful for the Perturbed family.
  double window_lo() const { return center_ - width_; }
  double window_hi() const { return center_ + width_; }
  const RateFunction* base() const { return base_.get(); }

  /// Short textual descriptor, e.g. "linear:1" or "table:5".
  std::string descriptor() const;

  /// Checks f(0) = 0 and f(K) > 0 for the given ceiling.
  void validate(double k_max) const;

 private:
  RateFamily family_ = RateFamily::Linear;
  double scale_ = 1.0;
  HolderClass holder_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::shared_ptr<const RateFunction> base_;
  double center_ = 0.0;
  double width_ = 1.0;
  double coef_ = 0.0;
  std::function<double(double)> bump_;
};

struct NetworkState {
  std::vector<double> potentials;
  double clock = 0.0;

  std::size_t size() const { return potentials.size(); }
  void validate(const ModelParams& params) const;
};

/// Spike of neuron i: its potential resets to 0, every other neuron j
/// receives a_K(x_j).
NetworkState delta_jump(const NetworkState& state, std::size_t i,
                        const ModelParams& params);
void delta_jump_inplace(std::span<double> potentials, std::size_t i,
                        const SoftCap& cap);

/// Total spiking intensity sum_i f(x_i).
double rate_bar(std::span<const double> potentials, const RateFunction& f);
double rate_bar(const NetworkState& state, const RateFunction& f);

/// Region S_{d,beta} = {floor(beta)/N < a < K - floor(beta)/N, |a - m| > d}.
struct EstimationRegion {
  double d = 0.0;
  int order = 0;
  std::size_t n_neurons = 1;
  double k_max = 0.0;
  double m = 0.0;

  EstimationRegion(const ModelParams& params, const HolderClass& holder,
                   double d);
  bool radius_admissible() const;
  bool contains(double a) const;
};

struct HolderAudit {
  bool passed = true;
  double f_at_zero = 0.0;
  double max_decrease = 0.0;
  double min_fmin_margin = 0.0;
  /// sup |f^(l)| on the grid for l = 0..floor(beta).
  std::vector<double> derivative_sup;
  double holder_quotient = 0.0;
  std::vector<std::string> violations;
};

/// Grid audit of membership in the declared Hoelder class on [0, k_max].
HolderAudit holder_audit(const RateFunction& f, double k_max,
                         double grid_step);

}  // namespace pdmpnet
