#include "pdmpnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace pdmpnet {

SoftCap::SoftCap(std::size_t n_neurons, double k_max)
    : n_(n_neurons), k_max_(k_max) {
  if (n_neurons == 0) throw ModelError("soft cap needs at least one neuron");
}

double SoftCap::operator()(double x) const {
  const double n = static_cast<double>(n_);
  const double u = std::clamp(n * (k_max_ - x) / 2.0, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u) / n;
}

ModelParams ModelParams::make(std::size_t n_neurons, double lambda, double m,
                              double k_max) {
  ModelParams p;
  p.n_neurons = n_neurons;
  p.lambda = lambda;
  p.m = m;
  p.k_max = k_max;
  p.validate();
  p.cap = SoftCap(n_neurons, k_max);
  return p;
}

void ModelParams::validate() const {
  if (n_neurons == 0) throw ModelError("n_neurons must be positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ModelError("lambda must be positive");
  if (!(m > 0.0 && m < k_max)) throw ModelError("require 0 < m < K");
  if (!(k_max >= 2.0 / static_cast<double>(n_neurons)) || !std::isfinite(k_max))
    throw ModelError("require K >= 2/N");
}

int HolderClass::order() const { return static_cast<int>(std::floor(beta)); }

double HolderClass::alpha() const { return beta - std::floor(beta); }

void HolderClass::validate() const {
  if (!(beta > 0.0)) throw ModelError("beta must be positive");
  if (!(sup_bound > 0.0)) throw ModelError("F must be positive");
  if (!(holder_const > 0.0)) throw ModelError("L must be positive");
  if (!(fmin_slope > 0.0)) throw ModelError("f_min must be positive on (0, K]");
}

std::string to_string(RateFamily family) {
  switch (family) {
    case RateFamily::Linear: return "linear";
    case RateFamily::Log1p: return "log1p";
    case RateFamily::ExpM1: return "expm1";
    case RateFamily::UserTable: return "table";
    case RateFamily::Perturbed: return "perturbed";
  }
  return "unknown";
}

double default_bump(double u) {
  if (u <= -1.0 || u >= 1.0) return 0.0;
  const double v = 1.0 - u * u;
  return v * v;
}

namespace {

void check_scale(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw ModelError("rate scale must be positive");
}

}  // namespace

RateFunction RateFunction::linear(double scale, HolderClass holder) {
  RateFunction f;
  check_scale(scale);
  f.family_ = RateFamily::Linear;
  f.scale_ = scale;
  f.holder_ = holder;
  return f;
}

RateFunction RateFunction::log1p(double scale, HolderClass holder) {
  RateFunction f = linear(scale, holder);
  f.family_ = RateFamily::Log1p;
  return f;
}

RateFunction RateFunction::expm1(double scale, HolderClass holder) {
  RateFunction f = linear(scale, holder);
  f.family_ = RateFamily::ExpM1;
  return f;
}

RateFunction RateFunction::table(std::vector<double> xs, std::vector<double> ys,
                                 HolderClass holder) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw ModelError("rate table needs at least two (x, f) pairs");
  if (xs.front() != 0.0 || ys.front() != 0.0)
    throw ModelError("rate table must start at (0, 0)");
  for (std::size_t k = 1; k < xs.size(); ++k) {
    if (!(xs[k] > xs[k - 1]))
      throw ModelError("rate table abscissae must be strictly increasing");
    if (ys[k] < ys[k - 1])
      throw ModelError("rate table values must be non-decreasing");
  }
  RateFunction f;
  f.family_ = RateFamily::UserTable;
  f.holder_ = holder;
  f.xs_ = std::move(xs);
  f.ys_ = std::move(ys);
  return f;
}

RateFunction RateFunction::table_from_csv(const std::string& path,
                                          HolderClass holder) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rate table " + path);
  std::vector<double> xs, ys;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0.0, y = 0.0;
    if (!(row >> x >> y)) {
      if (xs.empty()) continue;  // header
      throw ModelError("malformed rate table row: " + line);
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  return table(std::move(xs), std::move(ys), holder);
}

RateFunction RateFunction::perturbed(const RateFunction& base, double center,
                                     double width, double coef,
                                     std::function<double(double)> bump,
                                     HolderClass holder) {
  if (!(width > 0.0)) throw ModelError("perturbation width must be positive");
  RateFunction f;
  f.family_ = RateFamily::Perturbed;
  f.holder_ = holder;
  f.base_ = std::make_shared<const RateFunction>(base);
  f.center_ = center;
  f.width_ = width;
  f.coef_ = coef;
  f.bump_ = bump ? std::move(bump) : std::function<double(double)>(default_bump);
  return f;
}

double RateFunction::operator()(double x) const {
  switch (family_) {
    case RateFamily::Linear: return scale_ * x;
    case RateFamily::Log1p: return scale_ * std::log1p(x);
    case RateFamily::ExpM1: return scale_ * std::expm1(x);
    case RateFamily::UserTable: {
      if (x <= xs_.front()) return ys_.front();
      if (x >= xs_.back()) return ys_.back();
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      const std::size_t k = static_cast<std::size_t>(it - xs_.begin());
      const double w = (x - xs_[k - 1]) / (xs_[k] - xs_[k - 1]);
      return ys_[k - 1] + w * (ys_[k] - ys_[k - 1]);
    }
    case RateFamily::Perturbed: {
      const double u = (x - center_) / width_;
      return (*base_)(x) + coef_ * bump_(u) / width_;
    }
  }
  return 0.0;
}

std::string RateFunction::descriptor() const {
  std::ostringstream out;
  out.precision(17);
  out << to_string(family_) << ':';
  switch (family_) {
    case RateFamily::UserTable: out << xs_.size(); break;
    case RateFamily::Perturbed:
      out << base_->descriptor() << '@' << center_ << '/' << width_ << '/'
          << coef_;
      break;
    default: out << scale_;
  }
  return out.str();
}

void RateFunction::validate(double k_max) const {
  if ((*this)(0.0) != 0.0) throw ModelError("rate function must satisfy f(0) = 0");
  if (!((*this)(k_max) > 0.0))
    throw ModelError("rate function must satisfy f(K) > 0 (no dominating rate)");
}

void NetworkState::validate(const ModelParams& params) const {
  if (potentials.size() != params.n_neurons)
    throw ModelError("state dimension does not match N");
  for (double x : potentials) {
    if (!(x >= 0.0 && x <= params.k_max))
      throw ModelError("potential outside [0, K]");
  }
}

void delta_jump_inplace(std::span<double> potentials, std::size_t i,
                        const SoftCap& cap) {
  for (std::size_t j = 0; j < potentials.size(); ++j) {
    if (j != i)
      potentials[j] = std::min(cap.k_max(), potentials[j] + cap(potentials[j]));
  }
  potentials[i] = 0.0;
}

NetworkState delta_jump(const NetworkState& state, std::size_t i,
                        const ModelParams& params) {
  if (i >= state.size()) throw std::out_of_range("neuron index out of range");
  NetworkState out = state;
  delta_jump_inplace(out.potentials, i, params.cap);
  return out;
}

double rate_bar(std::span<const double> potentials, const RateFunction& f) {
  double total = 0.0;
  for (double x : potentials) total += f(x);
  return total;
}

double rate_bar(const NetworkState& state, const RateFunction& f) {
  return rate_bar(std::span<const double>(state.potentials), f);
}

EstimationRegion::EstimationRegion(const ModelParams& params,
                                   const HolderClass& holder, double d_)
    : d(d_),
      order(holder.order()),
      n_neurons(params.n_neurons),
      k_max(params.k_max),
      m(params.m) {}

bool EstimationRegion::radius_admissible() const {
  return d > (order + 2.0) / static_cast<double>(n_neurons);
}

bool EstimationRegion::contains(double a) const {
  const double margin = order / static_cast<double>(n_neurons);
  return a > margin && a < k_max - margin && std::abs(a - m) > d;
}

namespace {

// l-th finite-difference derivative on a uniform grid, central where
// possible and one-sided at the ends.
std::vector<double> differentiate(const std::vector<double>& values,
                                  double step) {
  const std::size_t n = values.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  out[0] = (values[1] - values[0]) / step;
  out[n - 1] = (values[n - 1] - values[n - 2]) / step;
  for (std::size_t k = 1; k + 1 < n; ++k)
    out[k] = (values[k + 1] - values[k - 1]) / (2.0 * step);
  return out;
}

}  // namespace

HolderAudit holder_audit(const RateFunction& f, double k_max,
                         double grid_step) {
  if (!(grid_step > 0.0)) throw ModelError("grid step must be positive");
  const HolderClass& hc = f.holder();
  const std::size_t n =
      static_cast<std::size_t>(std::ceil(k_max / grid_step - 1e-9)) + 1;
  const double step = k_max / static_cast<double>(n - 1);
  std::vector<double> grid(n), values(n);
  for (std::size_t k = 0; k < n; ++k) {
    grid[k] = step * static_cast<double>(k);
    values[k] = f(grid[k]);
  }

  HolderAudit report;
  auto slack = [](double bound) { return 1e-9 * std::max(1.0, std::abs(bound)); };

  report.f_at_zero = values[0];
  if (values[0] != 0.0) report.violations.push_back("f(0) != 0");

  for (std::size_t k = 1; k < n; ++k)
    report.max_decrease = std::max(report.max_decrease, values[k - 1] - values[k]);
  if (report.max_decrease > 0.0) report.violations.push_back("f decreases");

  report.min_fmin_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < n; ++k)
    report.min_fmin_margin =
        std::min(report.min_fmin_margin, values[k] - hc.f_min(grid[k]));
  if (report.min_fmin_margin < -slack(0.0))
    report.violations.push_back("f below f_min");

  const int order = hc.order();
  std::vector<double> deriv = values;
  for (int l = 0; l <= order; ++l) {
    if (l > 0) deriv = differentiate(deriv, step);
    double sup = 0.0;
    for (double v : deriv) sup = std::max(sup, std::abs(v));
    report.derivative_sup.push_back(sup);
    if (sup > hc.sup_bound + slack(hc.sup_bound))
      report.violations.push_back("sup |f^(" + std::to_string(l) + ")| > F");
  }

  // Hoelder quotient of the top derivative; subsample large grids.
  const double alpha = hc.alpha();
  const std::size_t stride = std::max<std::size_t>(1, n / 1000);
  for (std::size_t p = 0; p < n; p += stride) {
    for (std::size_t q = p + stride; q < n; q += stride) {
      const double dist = grid[q] - grid[p];
      const double quotient =
          std::abs(deriv[q] - deriv[p]) / std::pow(dist, alpha);
      report.holder_quotient = std::max(report.holder_quotient, quotient);
    }
  }
  if (report.holder_quotient > hc.holder_const + slack(hc.holder_const))
    report.violations.push_back("Hoelder quotient > L");

  report.passed = report.violations.empty();
  return report;
}

}  // namespace pdmpnet
