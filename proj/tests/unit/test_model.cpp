#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "pdmpnet/model.hpp"

using namespace pdmpnet;

namespace {

HolderClass id_class() { return HolderClass{1.0, 2.0, 1.0, 0.5}; }

}  // namespace

TEST_CASE("soft cap equals 1/N away from the ceiling and vanishes at K") {
  const SoftCap cap(4, 2.0);
  for (double x = 0.0; x < 2.0 - 0.5; x += 0.01) CHECK(cap(x) == 0.25);
  CHECK(cap(2.0 - 0.5) == 0.25);
  CHECK(cap(2.0) == 0.0);
  double prev = cap(0.0);
  for (double x = 0.0; x <= 2.0; x += 1e-4) {
    const double v = cap(x);
    CHECK(v <= prev);
    CHECK(x + v <= 2.0);
    prev = v;
  }
}

TEST_CASE("soft cap follows the smoothstep polynomial") {
  const SoftCap cap(4, 2.0);
  // u = 4 * 0.1 / 2 = 0.2, s(u) = 0.04 * 2.6 = 0.104.
  CHECK(cap(1.9) == doctest::Approx(0.104 / 4.0).epsilon(1e-14));
}

TEST_CASE("delta_jump examples") {
  SUBCASE("kick of 1/2 for N = 2") {
    const auto p = ModelParams::make(2, 1.0, 1.0, 2.0);
    const auto out = delta_jump(NetworkState{{0.5, 0.5}, 0.0}, 0, p);
    CHECK(out.potentials[0] == 0.0);
    CHECK(out.potentials[1] == 1.0);
  }
  SUBCASE("reset neuron already at zero") {
    const auto p = ModelParams::make(2, 1.0, 1.0, 2.0);
    const auto out = delta_jump(NetworkState{{0.0, 0.0}, 0.0}, 1, p);
    CHECK(out.potentials[0] == 0.5);
    CHECK(out.potentials[1] == 0.0);
  }
  SUBCASE("neuron near the ceiling") {
    const auto p = ModelParams::make(4, 1.0, 1.0, 2.0);
    const auto out = delta_jump(NetworkState{{1.9, 0.1, 0.1, 0.1}, 0.0}, 1, p);
    CHECK(out.potentials[0] == doctest::Approx(1.9 + 0.026).epsilon(1e-14));
    CHECK(out.potentials[0] < 2.0);
    CHECK(out.potentials[1] == 0.0);
    CHECK(out.potentials[2] == doctest::Approx(0.35));
  }
  SUBCASE("bad index") {
    const auto p = ModelParams::make(2, 1.0, 1.0, 2.0);
    CHECK_THROWS_AS(delta_jump(NetworkState{{0.0, 0.0}, 0.0}, 2, p), std::out_of_range);
  }
}

TEST_CASE("delta_jump keeps random states inside the box") {
  std::mt19937_64 gen(3);
  for (std::size_t n : {1u, 2u, 3u, 7u, 50u}) {
    const auto p = ModelParams::make(n, 1.0, 1.0, 2.0);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
      NetworkState s;
      s.potentials.resize(n);
      for (double& x : s.potentials) x = rep % 5 == 0 ? 2.0 - 1e-3 * u(gen) : u(gen);
      const auto out = delta_jump(s, gen() % n, p);
      for (double x : out.potentials) {
        CHECK(x >= 0.0);
        CHECK(x <= 2.0);
      }
    }
  }
}

TEST_CASE("rate_bar examples and permutation invariance") {
  const auto id = RateFunction::linear(1.0, id_class());
  CHECK(rate_bar(NetworkState{{1.0, 1.0}, 0.0}, id) == 2.0);
  CHECK(rate_bar(NetworkState{{0.0, 0.0, 0.0}, 0.0}, id) == 0.0);
  const auto ex = RateFunction::expm1(1.0, HolderClass{1.0, 10.0, 10.0, 1.0});
  CHECK(rate_bar(NetworkState{{0.5, 0.5, 0.5}, 0.0}, ex) ==
        doctest::Approx(3.0 * (std::exp(0.5) - 1.0)).epsilon(1e-15));

  std::vector<double> x{0.1, 1.7, 0.4, 0.9, 1.3};
  const double ref = rate_bar(x, ex);
  std::sort(x.begin(), x.end());
  do {
    CHECK(rate_bar(x, ex) == doctest::Approx(ref).epsilon(1e-15));
  } while (std::next_permutation(x.begin(), x.end()));
}

TEST_CASE("holder audit examples") {
  SUBCASE("identity in its class") {
    const auto f = RateFunction::linear(1.0, id_class());
    const auto audit = holder_audit(f, 2.0, 1e-3);
    CHECK(audit.passed);
    CHECK(audit.derivative_sup[0] == doctest::Approx(2.0));
    CHECK(audit.derivative_sup[1] == doctest::Approx(1.0));
  }
  SUBCASE("identity with too small F") {
    const auto f = RateFunction::linear(1.0, HolderClass{1.0, 0.5, 1.0, 0.5});
    CHECK_FALSE(holder_audit(f, 2.0, 1e-3).passed);
  }
  SUBCASE("expm1 with F = e^2 and L = e^2") {
    const double e2 = std::exp(2.0);
    const auto f = RateFunction::expm1(1.0, HolderClass{1.0, e2, e2, 1.0});
    CHECK(holder_audit(f, 2.0, 1e-3).passed);
  }
  SUBCASE("expm1 with F = e^2 - 1 misses the derivative bound") {
    const double e2 = std::exp(2.0);
    const auto f = RateFunction::expm1(1.0, HolderClass{1.0, e2 - 1.0, e2, 1.0});
    const auto audit = holder_audit(f, 2.0, 1e-3);
    CHECK_FALSE(audit.passed);
    REQUIRE(audit.violations.size() == 1);
    CHECK(audit.violations[0] == "sup |f^(1)| > F");
  }
  SUBCASE("f below f_min") {
    const auto f = RateFunction::log1p(1.0, HolderClass{1.0, 2.0, 1.0, 1.0});
    CHECK_FALSE(holder_audit(f, 2.0, 1e-3).passed);
  }
}

TEST_CASE("rate functions evaluate their families") {
  const auto hc = id_class();
  CHECK(RateFunction::linear(2.0, hc)(0.75) == 1.5);
  CHECK(RateFunction::log1p(1.0, hc)(1.0) == doctest::Approx(std::log(2.0)));
  CHECK(RateFunction::expm1(1.0, hc)(1.0) == doctest::Approx(std::exp(1.0) - 1.0));
  const auto t = RateFunction::table({0.0, 1.0, 2.0}, {0.0, 2.0, 3.0}, hc);
  CHECK(t(0.5) == doctest::Approx(1.0));
  CHECK(t(1.5) == doctest::Approx(2.5));
  CHECK(t(2.5) == 3.0);
  CHECK(t.descriptor() == "table:3");
  CHECK(RateFunction::linear(1.0, hc).descriptor() == "linear:1");
}

TEST_CASE("rate function validation") {
  const auto hc = id_class();
  CHECK_THROWS_AS(RateFunction::table({0.0, 1.0}, {0.0, 0.0}, hc).validate(2.0), ModelError);
  CHECK_THROWS_AS(RateFunction::table({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}, hc), ModelError);
  CHECK_THROWS_AS(RateFunction::table({0.5, 1.0}, {0.0, 1.0}, hc), ModelError);
  CHECK_THROWS_AS(RateFunction::linear(0.0, hc), ModelError);
  CHECK_NOTHROW(RateFunction::linear(1.0, hc).validate(2.0));
}

TEST_CASE("perturbed rate adds a bump inside its window only") {
  const auto base = RateFunction::linear(1.0, id_class());
  const auto f = RateFunction::perturbed(base, 0.5, 0.2, 0.01, default_bump, id_class());
  CHECK(f(0.2) == base(0.2));
  CHECK(f(0.9) == base(0.9));
  CHECK(f(0.5) == doctest::Approx(0.5 + 0.01 / 0.2));
  CHECK(f.window_lo() == doctest::Approx(0.3));
  CHECK(f.window_hi() == doctest::Approx(0.7));
}

TEST_CASE("model parameter validation") {
  CHECK_THROWS_AS(ModelParams::make(0, 1.0, 1.0, 2.0), ModelError);
  CHECK_THROWS_AS(ModelParams::make(2, 0.0, 1.0, 2.0), ModelError);
  CHECK_THROWS_AS(ModelParams::make(2, 1.0, 2.5, 2.0), ModelError);
  CHECK_THROWS_AS(ModelParams::make(2, 1.0, 0.0, 2.0), ModelError);
  CHECK_NOTHROW(ModelParams::make(100, 1.0, 1.0, 2.0));
}

TEST_CASE("estimation region") {
  const auto p = ModelParams::make(100, 1.0, 1.0, 2.0);
  const EstimationRegion region(p, id_class(), 0.05);
  CHECK(region.radius_admissible());
  CHECK(region.contains(0.5));
  CHECK_FALSE(region.contains(1.0));
  CHECK_FALSE(region.contains(2.0));
  CHECK_FALSE(region.contains(0.005));
  CHECK_FALSE(region.contains(1.02));
  CHECK(region.contains(1.06));
  const EstimationRegion narrow(p, id_class(), 0.02);
  CHECK_FALSE(narrow.radius_admissible());
  CHECK(narrow.contains(0.5));
}
