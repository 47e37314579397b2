#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "nanolaser/errors.hpp"
#include "nanolaser/experiments.hpp"

using namespace nanolaser;
using doctest::Approx;

TEST_CASE("noiseless attractors across the Hopf window") {
  const PhysicalParams p;
  const std::vector<double> grid{6.008, 6.010, 6.012, 6.016, 6.020, 6.024, 6.028, 6.032, 6.036};
  const SweepResult r = bifurcation_scan(grid, p);
  REQUIRE(r.points.size() == grid.size());
  CHECK(r.points.front().attractor == Attractor::FixedPointB);
  CHECK(r.points.front().corr.mean_x == Approx(1.0).epsilon(1e-6));
  CHECK(r.points.back().attractor == Attractor::FixedPointA);
  CHECK(r.points.back().corr.mean_x == Approx(-1.0).epsilon(1e-6));
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    CHECK(r.points[i].attractor == Attractor::LimitCycle);
    CHECK(r.points[i].noiseless_period_ns == Approx(std::numbers::pi / p.K).epsilon(0.02));
  }
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(r.points[i].corr.mean_x < r.points[i - 1].corr.mean_x);
  CHECK(std::abs(r.points[4].corr.mean_x) < 0.1);
  for (const auto& pt : r.points) CHECK(pt.converged);
  REQUIRE(r.bifurcations.size() == 2);
  CHECK(r.bifurcations[0] > 6.008);
  CHECK(r.bifurcations[0] < 6.010);
  CHECK(r.bifurcations[1] > 6.032);
  CHECK(r.bifurcations[1] < 6.036);
  CHECK(std::string(attractor_name(Attractor::LimitCycle)) == "limit_cycle");

  CHECK_THROWS_AS(bifurcation_scan({6.02, 6.01}, p), InvalidParams);
}

TEST_CASE("Hopf point bracketing") {
  const PhysicalParams p;
  const auto h = hopf_point(Supermode::Bonding, 6.0, 6.02, p);
  REQUIRE(h);
  CHECK(supermode_stability(Supermode::Bonding, (*h - 1e-6) * transparency_pump(p), p).stable());
  CHECK_FALSE(supermode_stability(Supermode::Bonding, (*h + 1e-6) * transparency_pump(p), p).stable());
  CHECK_FALSE(hopf_point(Supermode::Bonding, 5.0, 5.5, p));
}

TEST_CASE("profile helpers") {
  CHECK(zero_crossing({1, 2, 3}, {1.0, 0.5, -0.5}).value() == Approx(2.5));
  CHECK_FALSE(zero_crossing({1, 2, 3}, {1.0, 0.5, 0.2}));
  CHECK_THROWS_AS(zero_crossing({1, 2}, {1.0}), InvalidParams);

  const std::vector<double> single{1.0, 0.9, 0.7, 0.9, 1.0};
  CHECK(find_dips(single) == std::vector<std::size_t>{2});
  const std::vector<double> twin{1.0, 0.8, 0.95, 0.8, 1.0};
  CHECK(find_dips(twin).size() == 2);
  const std::vector<double> ripple{1.0, 0.5, 0.49, 0.495, 0.48, 1.0};
  CHECK(find_dips(ripple) == std::vector<std::size_t>{4});
  CHECK(find_dips(std::vector<double>{1.0, 2.0, 3.0}).empty());

  SweepResult s;
  for (double c : {1.0, 2.0, 3.0, 4.0, 5.0}) {
    SweepPoint pt;
    pt.control = c;
    pt.corr.mean_A = c == 3.0 ? 1.0 : (c == 2.0 || c == 4.0 ? 0.5 : 0.0);
    s.points.push_back(pt);
  }
  CHECK(order_parameter_window(s) == Approx(2.0));

  CHECK_THROWS_AS(require_monotone({}, "grid"), InvalidParams);
  CHECK_NOTHROW(require_monotone({1.0, 2.0}, "grid"));
}

TEST_CASE("short stationary scan") {
  const PhysicalParams p;
  StationaryOptions o;
  o.n_traj = 8;
  o.window = {2.0, 4.0, 5, 0.0};
  o.noiseless.relax_ns = 50.0;
  o.histograms = true;
  const auto scans = stationary_scan({1.2, 6.02}, {0.017}, p, o);
  REQUIRE(scans.size() == 1);
  const SweepResult& r = scans[0];
  REQUIRE(r.points.size() == 2);
  CHECK(r.points[0].below_threshold);
  CHECK_FALSE(r.points[1].below_threshold);
  CHECK(r.points[1].corr.count == 8 * static_cast<std::uint64_t>(4.0 / (5 * 2e-4)));
  CHECK(r.points[1].corr.mean_A > 0.3);
  REQUIRE(r.points[1].histogram);
  CHECK(r.points[1].histogram->x_bins() == 64);
  CHECK(r.points[1].histogram->total > 0);

  // Same seed, same numbers.
  const auto again = stationary_scan({1.2, 6.02}, {0.017}, p, o);
  CHECK(again[0].points[1].corr.g2_BA == r.points[1].corr.g2_BA);
}

TEST_CASE("short ramp") {
  const PhysicalParams p;
  const double P0 = transparency_pump(p);
  RampOptions o;
  o.n_traj = 8;
  o.init.relax_ns = 20.0;
  o.detector_bandwidth_GHz = 0.6;
  const RampResult r = ramp_experiment(PumpSchedule::ramp(6.0 * P0, 6.04 * P0, 0.5), p, o);
  REQUIRE(r.t_ns.size() == 10);
  CHECK(r.full.size() == 10);
  CHECK(r.filtered.size() == 10);
  CHECK(r.from_g2.size() == 10);
  for (std::size_t i = 1; i < r.t_ns.size(); ++i) CHECK(r.P_over_P0[i] > r.P_over_P0[i - 1]);
  CHECK(r.P_over_P0.front() == Approx(6.002).epsilon(1e-6));
  for (const auto& c : r.full) {
    CHECK(c.mean_A >= 0.0);
    CHECK(c.mean_A <= 1.0);
  }
}

TEST_CASE("beta sweep validation") {
  const PhysicalParams p;
  StationaryOptions o;
  CHECK_THROWS_AS(beta_sweep({}, {6.0}, p, o), InvalidParams);
  CHECK_THROWS_AS(beta_sweep({0.1, 0.01, 0.05}, {6.0}, p, o), InvalidParams);
}
