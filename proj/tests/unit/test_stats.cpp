#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "pdmpnet/stats.hpp"

using namespace pdmpnet;

TEST_CASE("sample moments") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  CHECK(stats::mean(xs) == 2.5);
  CHECK(stats::variance(xs) == doctest::Approx(5.0 / 3.0));
  CHECK(stats::standard_error(xs) == doctest::Approx(std::sqrt(5.0 / 12.0)));
  CHECK(stats::variance(std::vector<double>{3.0}) == 0.0);
}

TEST_CASE("linear fit recovers an exact line") {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y{1.0, 3.0, 5.0, 7.0};
  const auto fit = stats::linear_fit(x, y);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.slope_se == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("Kolmogorov survival function") {
  CHECK(stats::kolmogorov_survival(1.0) == doctest::Approx(0.27).epsilon(0.001));
  CHECK(stats::kolmogorov_survival(1.36) == doctest::Approx(0.0494).epsilon(0.005));
  CHECK(stats::kolmogorov_survival(0.1) == 1.0);
  // The two series agree where they meet.
  CHECK(stats::kolmogorov_survival(std::nextafter(1.0, 0.0)) ==
        doctest::Approx(stats::kolmogorov_survival(1.0)).epsilon(1e-9));
  double prev = 1.0;
  for (double x = 0.3; x < 3.0; x += 0.01) {
    const double v = stats::kolmogorov_survival(x);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
}

TEST_CASE("KS test accepts normal samples and rejects shifted ones") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z;
  std::vector<double> s(2000), shifted(2000);
  for (std::size_t k = 0; k < s.size(); ++k) {
    s[k] = z(gen);
    shifted[k] = s[k] + 0.3;
  }
  CHECK(stats::ks_test_normal(s).p_value > 0.01);
  CHECK(stats::ks_test_normal(shifted).p_value < 1e-6);
  CHECK_THROWS_AS(stats::ks_test_normal({}), std::invalid_argument);
}

TEST_CASE("chi-square against uniform counts") {
  const std::vector<double> flat{10.0, 10.0, 10.0};
  CHECK(stats::chi_square_uniform(flat).statistic == 0.0);
  CHECK(stats::chi_square_uniform(flat).p_value == doctest::Approx(1.0));
  const std::vector<double> skew{20.0, 10.0};
  const auto res = stats::chi_square_uniform(skew);
  CHECK(res.statistic == doctest::Approx(10.0 / 3.0));
  CHECK(res.dof == 1.0);
  // P(chi2_1 > 10/3) = erfc(sqrt(5/3)).
  CHECK(res.p_value == doctest::Approx(std::erfc(std::sqrt(5.0 / 3.0))).epsilon(1e-10));
}

TEST_CASE("normal cdf and quantile") {
  CHECK(stats::normal_cdf(0.0) == 0.5);
  CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959963984540054));
}

TEST_CASE("histogram total variation") {
  const std::vector<double> a{0.1, 0.2, 0.3, 0.4}, b{1.1, 1.2, 1.3, 1.4};
  CHECK(stats::histogram_tv(a, a, 0.0, 2.0, 8) == 0.0);
  CHECK(stats::histogram_tv(a, b, 0.0, 2.0, 8) == 1.0);
  CHECK(stats::histogram_tv(a, b, 0.0, 2.0, 1) == 0.0);
  CHECK(stats::histogram_tv(std::vector<double>{2.0}, std::vector<double>{1.9}, 0.0, 2.0, 4) == 0.0);
  CHECK_THROWS_AS(stats::histogram_tv(a, b, 0.0, 2.0, 0), std::invalid_argument);
}
