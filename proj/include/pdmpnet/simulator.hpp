// Exact simulation of the network by thinning, and the event log it
// produces.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdmpnet/flow.hpp"
#include "pdmpnet/model.hpp"

namespace pdmpnet {

struct SeedRecord {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
  /// Uniforms drawn from the stream, accepted or not.
  std::uint64_t uniforms_consumed = 0;
  /// Candidate times drawn from the dominating Poisson stream.
  std::uint64_t candidates = 0;
};

/// Complete record of one trajectory on [0, horizon]: the initial state and,
/// per accepted spike, its time, the spiking neuron and the pre-spike state.
class EventLog {
 public:
  EventLog(ModelParams params, std::string rate_id, NetworkState x0,
           double horizon, SeedRecord seed, std::vector<double> times,
           std::vector<std::uint32_t> indices, std::vector<double> pre_states);

  const ModelParams& params() const { return params_; }
  const std::string& rate_id() const { return rate_id_; }
  const NetworkState& x0() const { return x0_; }
  double horizon() const { return horizon_; }
  const SeedRecord& seed() const { return seed_; }
  std::size_t n_neurons() const { return params_.n_neurons; }

  std::size_t jump_count() const { return times_.size(); }
  double time(std::size_t n) const { return times_[n]; }
  std::size_t index(std::size_t n) const { return indices_[n]; }
  std::span<const double> pre_state(std::size_t n) const {
    return {pre_states_.data() + n * n_neurons(), n_neurons()};
  }
  /// Pre-spike potential of the spiking neuron of jump n.
  double spiking_potential(std::size_t n) const {
    return pre_states_[n * n_neurons() + indices_[n]];
  }
  std::span<const double> times() const { return times_; }

  /// X_t, right-continuous at jump times.
  NetworkState state_at(double t) const;

  /// The same trajectory observed on [0, t].
  EventLog prefix(double t) const;

  /// Calls fn(t0, duration, start, end) for every inter-jump segment,
  /// including the leading segment from x0 and the trailing one up to the
  /// horizon. `start` is the post-jump state, `end` the state just before
  /// the next jump.
  template <class Fn>
  void for_each_segment(Fn&& fn) const;

 private:
  ModelParams params_;
  std::string rate_id_;
  NetworkState x0_;
  double horizon_;
  SeedRecord seed_;
  std::vector<double> times_;
  std::vector<std::uint32_t> indices_;
  std::vector<double> pre_states_;
};

template <class Fn>
void EventLog::for_each_segment(Fn&& fn) const {
  const std::size_t n = n_neurons();
  std::vector<double> start = x0_.potentials;
  std::vector<double> end(n);
  double t0 = 0.0;
  for (std::size_t k = 0; k < jump_count(); ++k) {
    const auto pre = pre_state(k);
    fn(t0, times_[k] - t0, std::span<const double>(start), pre);
    std::copy(pre.begin(), pre.end(), start.begin());
    delta_jump_inplace(start, indices_[k], params_.cap);
    t0 = times_[k];
  }
  flow_state(start, horizon_ - t0, params_, end);
  fn(t0, horizon_ - t0, std::span<const double>(start),
     std::span<const double>(end));
}

enum class InitialPolicy { AllAtM, AllAtZero, Explicit };

struct SimConfig {
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  InitialPolicy policy = InitialPolicy::AllAtM;
  std::vector<double> explicit_state;

  void validate() const;
  NetworkState initial_state(const ModelParams& params) const;
};

/// Thinning against the constant envelope N f(K): candidates arrive at rate
/// N f(K), a candidate is accepted when U * N f(K) < sum_i f(x_i), and the
/// spiking neuron is drawn proportionally to f(x_i).
EventLog simulate(const ModelParams& params, const RateFunction& f,
                  const SimConfig& cfg);

/// CSV `time,index,pre_state_0,...` (index is 0-based) plus a key = value
/// sidecar at `<csv path>.meta`.
void write_event_log(const EventLog& log, const std::string& csv_path);
EventLog read_event_log(const std::string& csv_path);

struct RegenProbeConfig {
  double epsilon = 0.2;
  double delta_star = 0.25;
  std::size_t replications = 1000;
  std::uint64_t seed = 0;

  void validate(const ModelParams& params) const;
};

struct RegenProbeReport {
  std::vector<double> u_star;
  double t_star = 0.0;
  std::size_t replications = 0;
  double freq_event = 0.0;  // A_eps intersected with S
  double se_event = 0.0;
  double freq_ball = 0.0;   // X_{t*} in the sup-norm ball B_{delta*}(u*)
  double se_ball = 0.0;
  double analytic_bound = 0.0;
};

/// u* = ((N-1)/N, (N-2)/N, ..., 1/N, 0).
std::vector<double> regeneration_point(std::size_t n_neurons);

/// Monte Carlo frequencies of the ordered-spiking event and of reaching the
/// regeneration ball at t* = N eps, from uniformly random starts.
RegenProbeReport regen_probe(const ModelParams& params, const RateFunction& f,
                             const RegenProbeConfig& cfg);

}  // namespace pdmpnet
