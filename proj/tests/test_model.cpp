#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/tools/roots.hpp>

#include "nanolaser/errors.hpp"
#include "nanolaser/model.hpp"
#include "nanolaser/params.hpp"
#include "nanolaser/stability.hpp"

using namespace nanolaser;
using doctest::Approx;

namespace {

CavityState random_state(std::mt19937_64& g) {
  std::normal_distribution<double> N(0.0, 30.0);
  std::uniform_real_distribution<double> U(1e4, 3e4);
  return {{N(g), N(g)}, {N(g), N(g)}, U(g), U(g), 0.0};
}

}  // namespace

TEST_CASE("parameter validation") {
  PhysicalParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.saturation_photons() == Approx(5.0 / (2.2 * 0.017)));
  p.beta = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidParams);
  p = {};
  p.beta = 1.5;
  CHECK_THROWS_AS(p.validate(), InvalidParams);
  p = {};
  p.kappa = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidParams);
  p = {};
  p.V_a = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidParams);
}

TEST_CASE("co-scaling beta keeps beta*n0 and the density") {
  const PhysicalParams meso = mesoscopic_params();
  const PhysicalParams macro = macroscopic_params();
  CHECK(macro.beta == Approx(1.7e-5));
  CHECK(macro.V_a == Approx(16e-12));
  CHECK(macro.n0 == Approx(1.6e7));
  CHECK(macro.beta * macro.n0 == Approx(meso.beta * meso.n0).epsilon(1e-12));
  CHECK(macro.transparency_density() == Approx(1e18));
  CHECK(params_hash(meso) != params_hash(macro));
  CHECK(params_hash(meso) == params_hash(mesoscopic_params()));
}

TEST_CASE("gain") {
  const PhysicalParams p;
  CHECK(gain(p.n0, p) == 0.0);
  CHECK(gain(2.0 * p.n0, p) == Approx(598.4).epsilon(1e-12));

  // Gain clamp of the symmetric state: root of Re(eigenvalue) = 0 for the
  // bonding combination, found independently by bracketing.
  auto re_bonding = [&](double n) { return 0.5 * gain(n, p) - p.kappa + p.gamma_c; };
  boost::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(re_bonding, p.n0, 10.0 * p.n0,
                                                          boost::math::tools::eps_tolerance<double>(50), iters);
  const double n_clamp = 0.5 * (lo + hi);
  CHECK(n_clamp == Approx(p.n0 + 2.0 * (p.kappa - p.gamma_c) / (p.gamma_par * p.beta)).epsilon(1e-12));
  CHECK(gain(n_clamp, p) == Approx(2.0 * (p.kappa - p.gamma_c)).epsilon(1e-10));
}

TEST_CASE("spontaneous rate") {
  const PhysicalParams p;
  CHECK(spontaneous_rate(0.0, p) == 0.0);
  CHECK(spontaneous_rate(2e4, p) == Approx(4.0 * spontaneous_rate(1e4, p)).epsilon(1e-14));
  // beta F_P B n^2 / V_a in 1/s, converted to 1/ns, in long double.
  const long double ref = 0.017L * 1.03L * 3e-10L * 1.6e4L * 1.6e4L / 0.016e-12L * 1e-9L;
  CHECK(spontaneous_rate(1.6e4, p) == Approx(static_cast<double>(ref)).epsilon(1e-13));
  CHECK(spontaneous_rate(1.6e4, p) == Approx(84.048).epsilon(1e-12));
  double prev = 0.0;
  for (double n = 1.0; n < 1e5; n *= 1.7) {
    CHECK(spontaneous_rate(n, p) > prev);
    prev = spontaneous_rate(n, p);
  }
}

TEST_CASE("transparency pump") {
  PhysicalParams p;
  CHECK(transparency_pump(p) == Approx(8e4));
  const double th = threshold_pump(Supermode::Bonding, p) / transparency_pump(p);
  CHECK(th > 1.0);
  CHECK(th < 6.008);
  p.n0 *= 2.0;
  CHECK(transparency_pump(p) == Approx(16e4));
  p.n0 = 0.0;
  CHECK(transparency_pump(p) == 0.0);
}

TEST_CASE("drift") {
  const PhysicalParams p;
  const double P = 6.0 * transparency_pump(p);

  SUBCASE("below-threshold fixed point") {
    const CavityState s{{}, {}, P / p.gamma_tot, P / p.gamma_tot, 0.0};
    const StateDerivative d = drift(s, P, p);
    CHECK(d.da1 == cplx{});
    CHECK(d.da2 == cplx{});
    CHECK(d.dn1 == Approx(0.0).epsilon(1e-12).scale(P));
    CHECK(d.dn2 == Approx(0.0).epsilon(1e-12).scale(P));
  }
  SUBCASE("symmetric clamped state rotates") {
    const double n = p.n0 + 2.0 * (p.kappa - p.gamma_c) / (p.gamma_par * p.beta);
    const cplx a{3.0, -4.0};
    const CavityState s{a, a, n, n, 0.0};
    const StateDerivative d = drift(s, P, p);
    const cplx expected = cplx{0.0, p.alpha * (p.kappa - p.gamma_c) + p.K} * a;
    CHECK(d.da1.real() == Approx(expected.real()).epsilon(1e-12));
    CHECK(d.da1.imag() == Approx(expected.imag()).epsilon(1e-12));
    CHECK(d.da2 == d.da1);
    // Purely imaginary rate: d/dt |a|^2 = 2 Re(a* da) = 0.
    CHECK(std::real(std::conj(a) * d.da1) == Approx(0.0).scale(std::abs(expected) * 5.0));
  }
  SUBCASE("swap equivariance is exact") {
    std::mt19937_64 g(7);
    for (int i = 0; i < 200; ++i) {
      const CavityState s = random_state(g);
      const StateDerivative d = drift(s, P, p);
      const StateDerivative e = drift(swapped(s), P, p);
      CHECK(e.da1 == d.da2);
      CHECK(e.da2 == d.da1);
      CHECK(e.dn1 == d.dn2);
      CHECK(e.dn2 == d.dn1);
    }
  }
}

TEST_CASE("modal transform") {
  const double r2 = std::numbers::sqrt2;
  auto [b1, a1] = to_modal({1.0, 0.0}, {1.0, 0.0});
  CHECK(b1.real() == Approx(r2));
  CHECK(std::abs(a1) == Approx(0.0));
  auto [b2, a2] = to_modal({1.0, 0.0}, {-1.0, 0.0});
  CHECK(std::abs(b2) == Approx(0.0));
  CHECK(a2.real() == Approx(r2));
  const CavityState s{{1.0, 0.0}, {0.0, 1.0}, 0.0, 0.0, 0.0};
  const ModalFrame f = modal_frame(s);
  CHECK(f.I_B == Approx(1.0));
  CHECK(f.I_A == Approx(1.0));
  CHECK(f.x == Approx(0.0));

  SUBCASE("unitarity and inverse on random pairs") {
    std::mt19937_64 g(11);
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> E(-6.0, 6.0);
    for (int i = 0; i < 10000; ++i) {
      const double scale = std::pow(10.0, E(g));
      const cplx u{N(g) * scale, N(g) * scale}, v{N(g) * scale, N(g) * scale};
      const auto [b, a] = to_modal(u, v);
      const double lhs = std::norm(b) + std::norm(a), rhs = std::norm(u) + std::norm(v);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);
      const auto [u2, v2] = from_modal(b, a);
      CHECK(std::abs(u2 - u) <= 1e-12 * std::sqrt(rhs));
      CHECK(std::abs(v2 - v) <= 1e-12 * std::sqrt(rhs));
    }
  }
}

TEST_CASE("modal frame and Bloch angles") {
  const CavityState same{{2.0, 1.0}, {2.0, 1.0}, 0.0, 0.0, 0.0};
  const ModalFrame f = modal_frame(same);
  CHECK(f.x == Approx(1.0));
  CHECK(f.theta == Approx(std::numbers::pi / 2));
  CHECK(f.phi == Approx(0.0));

  const CavityState pole{{1.0, 0.0}, {}, 0.0, 0.0, 0.0};
  CHECK(modal_frame(pole).theta == 0.0);
  const CavityState south{{}, {0.0, 2.0}, 0.0, 0.0, 0.0};
  CHECK(modal_frame(south).theta == Approx(std::numbers::pi));

  // I_B = I_A
  const auto [u, v] = from_modal({1.0, 0.0}, {0.0, 1.0});
  CHECK(modal_frame({u, v, 0.0, 0.0, 0.0}).x == Approx(0.0).epsilon(1e-15));

  CHECK_THROWS_AS(modal_frame(CavityState{}), DegenerateInput);

  SUBCASE("x matches the mode-intensity definition and the Bloch x") {
    std::mt19937_64 g(3);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const CavityState s{{N(g), N(g)}, {N(g), N(g)}, 0.0, 0.0, 0.0};
      const ModalFrame m = modal_frame(s);
      CHECK(m.x == Approx((m.I_B - m.I_A) / (m.I_B + m.I_A)).epsilon(1e-12));
      CHECK(std::abs(m.x) <= 1.0);
      const BlochVector b = bloch_vector(s);
      CHECK(b.x == Approx(m.x).epsilon(1e-12));
      CHECK(b.x * b.x + b.y * b.y + b.z * b.z == Approx(1.0).epsilon(1e-12));
      CHECK(b.z == Approx(std::cos(m.theta)).epsilon(1e-12));
      CHECK(m.phi > -std::numbers::pi);
      CHECK(m.phi <= std::numbers::pi);
    }
  }
}

TEST_CASE("order parameter") {
  CHECK(order_parameter(1.0) == 0.0);
  CHECK(order_parameter(-1.0) == 0.0);
  CHECK(order_parameter(0.0) == 1.0);
  CHECK(order_parameter(0.6) == Approx(0.8).epsilon(1e-15));
  CHECK(order_parameter(1.0 + 1e-13) == 0.0);
  CHECK_THROWS_AS(order_parameter(1.01), OutOfRange);

  SUBCASE("invariant under a global phase rotation") {
    std::mt19937_64 g(5);
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    for (int i = 0; i < 1000; ++i) {
      const CavityState s{{N(g), N(g)}, {N(g), N(g)}, 0.0, 0.0, 0.0};
      const cplx rot = std::polar(1.0, phase(g));
      const CavityState r{s.a1 * rot, s.a2 * rot, 0.0, 0.0, 0.0};
      CHECK(order_parameter(modal_frame(r).x) == Approx(order_parameter(modal_frame(s).x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("phase wrapping") {
  CHECK(wrap_phase(std::numbers::pi) == Approx(std::numbers::pi));
  CHECK(wrap_phase(-std::numbers::pi) == Approx(std::numbers::pi));
  CHECK(wrap_phase(3.0 * std::numbers::pi / 2) == Approx(-std::numbers::pi / 2));
  CHECK(wrap_phase(0.25) == Approx(0.25));
}
