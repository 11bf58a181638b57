#include "pdmpnet/kernel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pdmpnet/quadrature.hpp"

namespace pdmpnet {

namespace {

constexpr int kNormPanels = 256;
constexpr int kMaxOrder = 10;

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::TruncGaussian: return "truncgauss";
    case KernelFamily::Epanechnikov: return "epanechnikov";
    case KernelFamily::Uniform: return "uniform";
    case KernelFamily::HighOrder: return "highorder";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "truncgauss") return KernelFamily::TruncGaussian;
  if (name == "epanechnikov") return KernelFamily::Epanechnikov;
  if (name == "uniform") return KernelFamily::Uniform;
  if (name == "highorder") return KernelFamily::HighOrder;
  throw KernelError("unknown kernel family '" + name + "'");
}

double Kernel::base_value(double y) const {
  const double r = radius_;
  switch (base_) {
    case KernelFamily::Epanechnikov: {
      const double u = y / r;
      return 0.75 * (1.0 - u * u) / r;
    }
    case KernelFamily::Uniform: return 0.5 / r;
    case KernelFamily::TruncGaussian:
      return std::exp(-0.5 * y * y) * gauss_norm_;
    case KernelFamily::HighOrder: break;
  }
  return 0.0;
}

double Kernel::operator()(double y) const {
  if (!(std::abs(y) < radius_)) return 0.0;
  if (poly_) {
    const auto& c = *poly_;
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * y + c[k];
    return v;
  }
  const double y2 = y * y;
  double mult = 0.0;
  for (std::size_t k = multiplier_.size(); k-- > 0;) mult = mult * y2 + multiplier_[k];
  return base_value(y) * mult;
}

double Kernel::moment(int j) const {
  return gauss_legendre_panels(
      [&](double y) { return std::pow(y, j) * (*this)(y); }, -radius_, radius_,
      kNormPanels);
}

void Kernel::cache_norms() {
  integral_ = moment(0);
  integral_sq_ = gauss_legendre_panels(
      [&](double y) {
        const double q = (*this)(y);
        return q * q;
      },
      -radius_, radius_, kNormPanels);
  // |Q| has kinks at the roots of Q; the fine panels keep that error small.
  l1_norm_ = gauss_legendre_panels([&](double y) { return std::abs((*this)(y)); },
                                   -radius_, radius_, 4 * kNormPanels);
  sup_norm_ = 0.0;
  constexpr int samples = 4096;
  for (int k = 0; k < samples; ++k) {
    const double y = -radius_ + 2.0 * radius_ * (k + 0.5) / samples;
    sup_norm_ = std::max(sup_norm_, std::abs((*this)(y)));
  }
}

Kernel Kernel::make(KernelFamily family, double radius, int order,
                    KernelFamily base) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw KernelError("kernel radius must be positive");
  if (order < 0) throw KernelError("kernel order must be non-negative");
  Kernel q;
  q.family_ = family;
  q.radius_ = radius;
  q.order_ = order;
  q.base_ = family == KernelFamily::HighOrder ? base : family;
  if (q.base_ == KernelFamily::HighOrder)
    throw KernelError("high-order kernel needs a symmetric base family");

  if (family != KernelFamily::HighOrder && order > 1)
    throw KernelError(to_string(family) +
                      " kernel cannot cancel moments beyond order 1; use highorder");
  if (order > kMaxOrder) throw KernelError("kernel order above 10 is not supported");

  if (q.base_ == KernelFamily::TruncGaussian) {
    const double mass = std::erf(radius / std::numbers::sqrt2);
    q.gauss_norm_ = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * mass);
  }

  if (family == KernelFamily::HighOrder && order >= 2) {
    // Solve sum_k c_k mu_{2i+2k} = delta_{i0}, i, k = 0..order/2, with
    // mu_j = int y^j base(y) dy.
    const int terms = order / 2 + 1;
    auto base_moment = [&](int j) {
      return gauss_legendre_panels(
          [&](double y) { return std::pow(y, j) * q.base_value(y); }, -radius,
          radius, kNormPanels);
    };
    Eigen::MatrixXd a(terms, terms);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(terms);
    rhs(0) = 1.0;
    for (int i = 0; i < terms; ++i)
      for (int k = 0; k < terms; ++k) a(i, k) = base_moment(2 * i + 2 * k);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible() || lu.rcond() < 1e-14)
      throw KernelError("moment system is singular for the requested order");
    const Eigen::VectorXd c = lu.solve(rhs);
    q.multiplier_.assign(c.data(), c.data() + terms);
  } else if (q.base_ == KernelFamily::TruncGaussian) {
    q.multiplier_ = {1.0};
  }

  // Polynomial form for polynomial bases.
  if (q.base_ == KernelFamily::Epanechnikov || q.base_ == KernelFamily::Uniform) {
    std::vector<double> base_poly;
    if (q.base_ == KernelFamily::Epanechnikov)
      base_poly = {0.75 / radius, 0.0, -0.75 / (radius * radius * radius)};
    else
      base_poly = {0.5 / radius};
    std::vector<double> mult(2 * q.multiplier_.size() - 1, 0.0);
    for (std::size_t k = 0; k < q.multiplier_.size(); ++k) mult[2 * k] = q.multiplier_[k];
    std::vector<double> prod(base_poly.size() + mult.size() - 1, 0.0);
    for (std::size_t i = 0; i < base_poly.size(); ++i)
      for (std::size_t j = 0; j < mult.size(); ++j) prod[i + j] += base_poly[i] * mult[j];
    q.poly_ = std::move(prod);
  }

  q.cache_norms();
  return q;
}

std::string Kernel::descriptor() const {
  std::ostringstream out;
  out << to_string(family_) << "(R=" << radius_ << ",order=" << order_;
  if (family_ == KernelFamily::HighOrder) out << ",base=" << to_string(base_);
  out << ')';
  return out.str();
}

}  // namespace pdmpnet
