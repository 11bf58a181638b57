// Composite Gauss-Legendre quadrature with panel doubling.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace pdmpnet {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kGaussNodes = 16;
inline constexpr int kMaxPanels = 1 << 14;

struct GaussLegendreRule {
  std::array<double, kGaussNodes> nodes{};
  std::array<double, kGaussNodes> weights{};
};

/// 16-point rule on [-1, 1], computed once by Newton iteration.
const GaussLegendreRule& gauss_legendre16();

/// Sum over `panels` equal panels of the 16-point rule on [lo, hi].
template <class F>
double gauss_legendre_panels(F&& g, double lo, double hi, int panels) {
  const auto& rule = gauss_legendre16();
  const double width = (hi - lo) / panels;
  const double half = 0.5 * width;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * width;
    double panel = 0.0;
    for (int k = 0; k < kGaussNodes; ++k)
      panel += rule.weights[k] * g(mid + half * rule.nodes[k]);
    total += half * panel;
  }
  return total;
}

/// Integrates g over [lo, hi], doubling the panel count until two
/// successive estimates agree within `tol` (or to machine precision
/// relative to the estimate, whichever is looser). Throws QuadratureError on
/// non-finite values or when the panel cap is reached first.
template <class F>
double integrate(F&& g, double lo, double hi, double tol,
                 int min_panels = 1, int max_panels = kMaxPanels) {
  if (!(tol > 0.0)) throw std::invalid_argument("quadrature tolerance must be positive");
  if (hi <= lo) return 0.0;
  double coarse = gauss_legendre_panels(g, lo, hi, min_panels);
  if (!std::isfinite(coarse)) throw QuadratureError("non-finite integrand");
  for (int panels = 2 * min_panels; panels <= max_panels; panels *= 2) {
    const double fine = gauss_legendre_panels(g, lo, hi, panels);
    if (!std::isfinite(fine)) throw QuadratureError("non-finite integrand");
    if (std::abs(fine - coarse) <= std::max(tol, 1e-14 * std::abs(fine))) return fine;
    coarse = fine;
  }
  throw QuadratureError("quadrature did not reach tolerance within panel cap");
}

}  // namespace pdmpnet
