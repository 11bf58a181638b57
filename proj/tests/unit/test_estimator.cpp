#include <algorithm>
#include <cmath>
#include <cstring>

#include "doctest.h"
#include "pdmpnet/estimator.hpp"

using namespace pdmpnet;

namespace {

HolderClass id_class() { return HolderClass{1.0, 2.0, 1.0, 0.5}; }

EventLog synthetic(std::size_t n, std::vector<double> x0, double horizon, std::vector<double> times,
                   std::vector<std::uint32_t> idx, std::vector<double> pre) {
  return EventLog(ModelParams::make(n, 1.0, 1.0, 2.0), "synthetic", NetworkState{std::move(x0), 0.0},
                  horizon, SeedRecord{}, std::move(times), std::move(idx), std::move(pre));
}

const Kernel& epa() {
  static const Kernel q = Kernel::make(KernelFamily::Epanechnikov, 1.0, 1);
  return q;
}

}  // namespace

TEST_CASE("numerator examples") {
  const auto empty = synthetic(1, {1.0}, 5.0, {}, {}, {});
  CHECK(numerator(empty, 0.5, 0.1, epa()) == 0.0);

  const auto one = synthetic(1, {0.0}, 5.0, {1.0}, {0}, {0.5});
  CHECK(numerator(one, 0.5, 0.1, epa()) == doctest::Approx(7.5).epsilon(1e-15));

  // Spiking potentials 0.45, 0.52 (neuron 1) and 0.8; the last is outside the window.
  const auto three = synthetic(2, {0.0, 0.0}, 5.0, {1.0, 2.0, 3.0}, {0, 1, 0},
                               {0.45, 0.1, 0.3, 0.52, 0.8, 0.2});
  const double hand = 0.75 * (1.0 - 0.25) / 0.1 + 0.75 * (1.0 - 0.04) / 0.1;
  CHECK(numerator(three, 0.5, 0.1, epa()) == doctest::Approx(hand).epsilon(1e-13));
}

TEST_CASE("denominator examples") {
  // Neuron resting at m never visits a neighbourhood of 0.3.
  const auto rest = synthetic(1, {1.0}, 5.0, {}, {}, {});
  CHECK(denominator(rest, 0.3, 0.1, epa()) == 0.0);

  // Uniform kernel: the integral is the transit time through (0.4, 0.6) over 2h.
  const auto q = Kernel::make(KernelFamily::Uniform, 1.0, 1);
  const auto climb = synthetic(1, {0.0}, 10.0, {}, {}, {});
  const double transit = std::log(1.0 / 0.4) - std::log(1.0 / 0.6);
  CHECK(denominator(climb, 0.5, 0.1, q) == doctest::Approx(transit / 0.2).epsilon(1e-10));
}

TEST_CASE("denominator matches a dense Riemann sum") {
  const auto p = ModelParams::make(3, 1.0, 1.0, 2.0);
  const auto f = RateFunction::linear(1.0, id_class());
  SimConfig cfg;
  cfg.horizon = 20.0;
  cfg.seed = 3;
  const auto log = simulate(p, f, cfg);
  const double a = 0.5, h = 0.1, ds = 1e-4;
  double riemann = 0.0;
  for (double s = 0.5 * ds; s < cfg.horizon; s += ds)
    for (double x : log.state_at(s).potentials) riemann += epa().scaled(x - a, h) * ds;
  CHECK(denominator(log, a, h, epa()) == doctest::Approx(riemann).epsilon(1e-3));
}

TEST_CASE("estimate_at uses 0/0 = 0 and flags the admissibility event") {
  const auto rest = synthetic(1, {1.0}, 5.0, {}, {}, {});
  const auto rep = estimate_at(rest, 0.3, 0.1, epa(), 0.01);
  CHECK(rep.f_hat == 0.0);
  CHECK(rep.pi1_hat == 0.0);
  CHECK_FALSE(rep.a_tr_satisfied);
  CHECK(std::isinf(rep.ci_halfwidth));

  const auto climb = synthetic(1, {0.0}, 10.0, {}, {}, {});
  const auto ok = estimate_at(climb, 0.5, 0.1, epa(), 0.01);
  CHECK(ok.a_tr_satisfied);
  CHECK(ok.pi1_hat == doctest::Approx(ok.denominator / 10.0));
}

TEST_CASE("estimator recovers a flat rate") {
  // f = 1 away from a thin ramp at the origin.
  const auto f = RateFunction::table({0.0, 0.01, 2.0}, {0.0, 1.0, 1.0}, HolderClass{1.0, 2.0, 100.0, 0.5});
  const auto p = ModelParams::make(1, 1.0, 1.0, 2.0);
  SimConfig cfg;
  cfg.horizon = 3000.0;
  cfg.seed = 17;
  const auto log = simulate(p, f, cfg);
  const auto rep = estimate_at(log, 0.5, 0.1, epa(), 0.01);
  CHECK(std::abs(rep.f_hat - 1.0) <= 2.0 * rep.ci_halfwidth);
  CHECK(rep.ci_halfwidth < 0.3);
}

TEST_CASE("default bandwidth") {
  CHECK(default_bandwidth(1000.0, 1.0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(default_bandwidth(32.0, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(default_bandwidth(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("region_check examples") {
  const auto p = ModelParams::make(100, 1.0, 1.0, 2.0);
  CHECK(region_check(0.5, p, id_class(), 0.05));
  CHECK(region_check(1.5, p, id_class(), 0.05));
  CHECK_FALSE(region_check(1.0, p, id_class(), 0.05));
  CHECK_FALSE(region_check(0.005, p, id_class(), 0.05));
  CHECK_FALSE(region_check(1.995, p, id_class(), 0.05));
  CHECK_FALSE(region_check(0.5, p, id_class(), 0.02));
  const auto small = ModelParams::make(5, 1.0, 1.0, 2.0);
  CHECK_FALSE(region_check(0.3, small, id_class(), 0.6));
  CHECK(region_check(0.3, small, id_class(), 0.65));
}

TEST_CASE("csv row matches the header") {
  const auto climb = synthetic(1, {0.0}, 10.0, {}, {}, {});
  const auto row = to_csv_row(estimate_at(climb, 0.5, 0.1, epa(), 0.01));
  CHECK(std::count(row.begin(), row.end(), ',') ==
        std::count(kEstimateCsvHeader, kEstimateCsvHeader + std::strlen(kEstimateCsvHeader), ','));
  CHECK(row.rfind("0.5,0.10000000000000001,10,", 0) == 0);
}

TEST_CASE("occupation density sums the denominators") {
  const auto p = ModelParams::make(2, 1.0, 1.0, 2.0);
  const auto f = RateFunction::linear(1.0, id_class());
  SimConfig cfg;
  cfg.horizon = 30.0;
  cfg.seed = 9;
  const auto log = simulate(p, f, cfg);
  const std::vector<double> grid{0.2, 0.5, 1.3};
  const auto dens = occupation_density(log, grid, 0.1, epa());
  for (std::size_t k = 0; k < grid.size(); ++k)
    CHECK(dens[k] == doctest::Approx(denominator(log, grid[k], 0.1, epa()) / 60.0).epsilon(1e-7));
}
