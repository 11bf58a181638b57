// Smoothed cross-validation bandwidth choice on the jump chain.
#pragma once

#include <cstddef>
#include <vector>

#include "pdmpnet/kernel.hpp"
#include "pdmpnet/simulator.hpp"

namespace pdmpnet {

/// Evaluates S(x) = sum_z Q_h(x - z) over a fixed point set.
///
/// Polynomial kernels use prefix power sums inside buckets of width h R,
/// so each evaluation costs O(log n) independent of the window population.
/// Other kernels sum the points inside the window directly.
class KernelSum {
 public:
  KernelSum(std::vector<double> points, const Kernel& q, double h);

  double operator()(double x) const;
  std::size_t size() const { return points_.size(); }

 private:
  double direct(double x, std::size_t b, std::size_t e) const;

  Kernel q_;
  double h_;
  double reach_;
  std::vector<double> points_;
  std::vector<double> coeffs_;  // empty when the kernel is not polynomial
  // Bucket k covers [bucket_ids_[k] * reach, ...) and points
  // [bucket_begin_[k], bucket_begin_[k + 1]).
  std::vector<long long> bucket_ids_;
  std::vector<std::size_t> bucket_begin_;
  // prefix_[p][i] = sum over the first i points of ((z - origin(z)) / h)^p.
  std::vector<std::vector<long double>> prefix_;
};

/// pi_hat(a) = 1/((n - ell) N) sum_{k=ell+1}^{n} sum_i Q_h(Z_k^i - a) over the
/// full pre-jump state vectors Z_k (1-based k).
class JumpChainDensity {
 public:
  JumpChainDensity(const EventLog& log, std::size_t ell, std::size_t n, double h,
                   const Kernel& q);
  double operator()(double a) const { return sum_(a) * scale_; }

 private:
  KernelSum sum_;
  double scale_;
};

JumpChainDensity jump_chain_density(const EventLog& log, std::size_t ell,
                                    std::size_t n, double h, const Kernel& q);

struct ScvConfig {
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  std::size_t ell = 0;
  std::size_t n = 0;
  std::vector<double> grid;
  double tol = 1e-6;

  /// m1 = ceil(0.2 n), m2 = ceil(0.4 n), ell = ceil(0.6 n) with n the jump
  /// count, and 32 log-spaced bandwidths over [t^{-1/2}, t^{-1/8}].
  static ScvConfig defaults(const EventLog& log);
  static std::vector<double> log_grid(double lo, double hi, std::size_t count);

  void validate(const EventLog& log) const;
};

/// int_0^K pi_hat^2 - 2/(N (m2 - m1)) sum_{k=m1+1}^{m2} sum_i pi_hat(Z_k^i).
double scv_score(const EventLog& log, const ScvConfig& cfg, double h,
                 const Kernel& q);

struct ScvResult {
  double h_hat = 0.0;
  std::size_t index = 0;
  std::vector<double> grid;
  std::vector<double> scores;

  bool interior() const { return index > 0 && index + 1 < grid.size(); }
};

/// Grid minimizer of the score; ties go to the smaller bandwidth.
ScvResult scv_select(const EventLog& log, const ScvConfig& cfg, const Kernel& q);

/// Index of the minimum, ties broken toward the smallest bandwidth.
std::size_t argmin_smallest(const std::vector<double>& grid,
                            const std::vector<double>& scores);

}  // namespace pdmpnet
