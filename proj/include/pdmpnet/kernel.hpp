// Compactly supported smoothing kernels with vanishing moments.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdmpnet {

class KernelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform is the normalized indicator of [-R, R]; it is not continuous but
/// gives exact transit-time checks.
enum class KernelFamily { TruncGaussian, Epanechnikov, Uniform, HighOrder };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

class Kernel {
 public:
  /// Builds a kernel with int Q = 1 and int y^j Q = 0 for 1 <= j <= order.
  /// Symmetric base families only reach order 1; HighOrder multiplies
  /// `base` by an even polynomial chosen to cancel the even moments up to
  /// `order`.
  static Kernel make(KernelFamily family, double radius, int order,
                     KernelFamily base = KernelFamily::Epanechnikov);

  /// Q(y); zero for |y| >= R.
  double operator()(double y) const;
  /// Q_h(y) = Q(y / h) / h.
  double scaled(double y, double h) const { return (*this)(y / h) / h; }

  KernelFamily family() const { return family_; }
  KernelFamily base_family() const { return base_; }
  double radius() const { return radius_; }
  int order() const { return order_; }

  double integral() const { return integral_; }
  double integral_sq() const { return integral_sq_; }
  double l1_norm() const { return l1_norm_; }
  double sup_norm() const { return sup_norm_; }

  /// int y^j Q(y) dy by quadrature.
  double moment(int j) const;

  /// Monomial coefficients of Q on [-R, R] when Q is a polynomial there.
  const std::optional<std::vector<double>>& polynomial() const { return poly_; }

  std::string descriptor() const;

 private:
  Kernel() = default;
  double base_value(double y) const;
  void cache_norms();

  KernelFamily family_ = KernelFamily::Epanechnikov;
  KernelFamily base_ = KernelFamily::Epanechnikov;
  double radius_ = 1.0;
  int order_ = 1;
  double gauss_norm_ = 1.0;
  // Even multiplier sum_k c_k y^(2k) for HighOrder.
  std::vector<double> multiplier_{1.0};
  std::optional<std::vector<double>> poly_;

  double integral_ = 1.0;
  double integral_sq_ = 0.0;
  double l1_norm_ = 1.0;
  double sup_norm_ = 0.0;
};

}  // namespace pdmpnet
