#include "pdmpnet/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdmpnet/quadrature.hpp"

namespace pdmpnet {

double flow_map(double x, double dt, const ModelParams& params) {
  if (dt == 0.0) return x;
  const double decay = std::exp(-params.lambda * dt);
  return params.m + (x - params.m) * decay;
}

void flow_state(std::span<const double> from, double dt,
                const ModelParams& params, std::span<double> to) {
  if (dt == 0.0) {
    std::copy(from.begin(), from.end(), to.begin());
    return;
  }
  const double decay = std::exp(-params.lambda * dt);
  for (std::size_t i = 0; i < from.size(); ++i)
    to[i] = params.m + (from[i] - params.m) * decay;
}

double flow_inverse(double y, double z, const ModelParams& params) {
  if (z == y) return 0.0;
  const double m = params.m;
  const bool between = (y < m) ? (z > y && z < m) : (z < y && z > m);
  if (!between) throw FlowDomainError("flow never reaches the requested potential");
  return std::log((y - m) / (z - m)) / params.lambda;
}

std::optional<std::pair<double, double>> flow_window(
    double x, double duration, Interval window, const ModelParams& params) {
  const double m = params.m;
  const double inf = std::numeric_limits<double>::infinity();
  double enter = 0.0;
  double leave = inf;
  if (x == m) {
    if (m < window.lo || m > window.hi) return std::nullopt;
  } else if (x < m) {
    // Increasing toward m.
    if (x > window.hi) return std::nullopt;
    if (x < window.lo) {
      if (window.lo >= m) return std::nullopt;
      enter = flow_inverse(x, window.lo, params);
    }
    if (window.hi < m) leave = flow_inverse(x, window.hi, params);
  } else {
    if (x < window.lo) return std::nullopt;
    if (x > window.hi) {
      if (window.hi <= m) return std::nullopt;
      enter = flow_inverse(x, window.hi, params);
    }
    if (window.lo > m) leave = flow_inverse(x, window.lo, params);
  }
  leave = std::min(leave, duration);
  if (!(enter < leave)) return std::nullopt;
  return std::make_pair(enter, leave);
}

double segment_integral(const std::function<double(double)>& g, double x,
                        double duration, const ModelParams& params, double tol,
                        std::optional<Interval> support) {
  if (!(duration > 0.0)) return 0.0;
  double lo = 0.0, hi = duration;
  if (support) {
    const auto win = flow_window(x, duration, *support, params);
    if (!win) return 0.0;
    lo = win->first;
    hi = win->second;
  }
  const double m = params.m;
  const double lambda = params.lambda;
  const double offset = x - m;
  return integrate(
      [&](double u) { return g(m + offset * std::exp(-lambda * u)); }, lo, hi,
      tol);
}

double segment_integral(const std::function<double(double)>& g,
                        const FlowSegment& seg, std::size_t neuron,
                        const ModelParams& params, double tol,
                        std::optional<Interval> support) {
  if (neuron >= seg.start_state.size())
    throw std::out_of_range("neuron index out of range");
  if (seg.duration < 0.0) throw std::invalid_argument("negative segment duration");
  return segment_integral(g, seg.start_state.potentials[neuron], seg.duration,
                          params, tol, support);
}

}  // namespace pdmpnet
