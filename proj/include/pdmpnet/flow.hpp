// Deterministic inter-spike dynamics: exponential relaxation toward m.
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>

#include "pdmpnet/model.hpp"

namespace pdmpnet {

class FlowDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct FlowSegment {
  NetworkState start_state;
  double duration = 0.0;
};

/// Closed interval of potentials.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Drift b(x) = lambda (x - m).
inline double drift(double x, const ModelParams& params) {
  return params.lambda * (x - params.m);
}

/// e^{-lambda dt} x + (1 - e^{-lambda dt}) m.
double flow_map(double x, double dt, const ModelParams& params);

/// Applies the flow to every coordinate, reusing one exponential.
void flow_state(std::span<const double> from, double dt,
                const ModelParams& params, std::span<double> to);

/// Time t >= 0 with flow_map(y, t) = z. Requires z in the half-open
/// interval between y (inclusive) and m (exclusive).
double flow_inverse(double y, double z, const ModelParams& params);

/// Sub-interval of [0, duration] during which the flow started at x stays
/// in `window`, or nothing if it never enters.
std::optional<std::pair<double, double>> flow_window(
    double x, double duration, Interval window, const ModelParams& params);

/// int_0^duration g(flow_map(x, u)) du by composite Gauss-Legendre in the
/// time variable. With a declared support, only the time window in which
/// the flow lies inside it is integrated.
double segment_integral(const std::function<double(double)>& g, double x,
                        double duration, const ModelParams& params, double tol,
                        std::optional<Interval> support = std::nullopt);

double segment_integral(const std::function<double(double)>& g,
                        const FlowSegment& seg, std::size_t neuron,
                        const ModelParams& params, double tol,
                        std::optional<Interval> support = std::nullopt);

}  // namespace pdmpnet
