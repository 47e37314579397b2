#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "nanolaser/model.hpp"
#include "nanolaser/params.hpp"
#include "nanolaser/rng.hpp"
#include "nanolaser/stability.hpp"

using namespace nanolaser;
using doctest::Approx;

namespace {

// Leading eigenvalue of a finite-difference Jacobian in the frame rotating at
// omega, with the eigenvalue closest to zero (global phase) removed.
cplx numeric_leading(const PhaseLockedState& fp, double P, const PhysicalParams& p) {
  auto f = [&](const Eigen::Matrix<double, 6, 1>& v) {
    const CavityState s{{v[0], v[1]}, {v[2], v[3]}, v[4], v[5], 0.0};
    const StateDerivative d = drift(s, P, p);
    const cplx r1 = d.da1 - cplx{0.0, fp.omega} * s.a1;
    const cplx r2 = d.da2 - cplx{0.0, fp.omega} * s.a2;
    Eigen::Matrix<double, 6, 1> out;
    out << r1.real(), r1.imag(), r2.real(), r2.imag(), d.dn1, d.dn2;
    return out;
  };
  Eigen::Matrix<double, 6, 1> x0;
  const auto& s = fp.state;
  x0 << s.a1.real(), s.a1.imag(), s.a2.real(), s.a2.imag(), s.n1, s.n2;
  Eigen::Matrix<double, 6, 6> J;
  for (int j = 0; j < 6; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x0[j]));
    Eigen::Matrix<double, 6, 1> xp = x0, xm = x0;
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> es(J);
  std::vector<cplx> ev(es.eigenvalues().begin(), es.eigenvalues().end());
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  ev.erase(ev.begin());
  return *std::max_element(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
}

}  // namespace

TEST_CASE("phase-locked supermodes are stationary in the rotating frame") {
  const PhysicalParams p;
  const double P = 6.02 * transparency_pump(p);
  for (Supermode m : {Supermode::Bonding, Supermode::Antibonding}) {
    const auto fp = phase_locked_state(m, P, p);
    REQUIRE(fp);
    const StateDerivative d = drift(fp->state, P, p);
    const cplx w{0.0, fp->omega};
    CHECK(std::abs(d.da1 - w * fp->state.a1) <= 1e-9 * std::abs(w * fp->state.a1));
    CHECK(std::abs(d.da2 - w * fp->state.a2) <= 1e-9 * std::abs(w * fp->state.a2));
    CHECK(std::abs(d.dn1) <= 1e-9 * P);
    CHECK(std::abs(d.dn2) <= 1e-9 * P);
    const ModalFrame f = modal_frame(fp->state);
    CHECK(f.x == Approx(m == Supermode::Bonding ? 1.0 : -1.0));
  }
  CHECK_FALSE(phase_locked_state(Supermode::Bonding, 0.5 * threshold_pump(Supermode::Bonding, p), p));
}

TEST_CASE("supermode stability against a finite-difference Jacobian") {
  const PhysicalParams p;
  for (double r : {6.0, 6.008, 6.02, 6.036, 6.1}) {
    const double P = r * transparency_pump(p);
    for (Supermode m : {Supermode::Bonding, Supermode::Antibonding}) {
      const auto fp = phase_locked_state(m, P, p);
      REQUIRE(fp);
      const StabilityReport rep = supermode_stability(m, P, p);
      const cplx num = numeric_leading(*fp, P, p);
      CHECK(rep.leading.real() == Approx(num.real()).epsilon(1e-4).scale(1.0));
      CHECK(std::abs(rep.leading.imag()) == Approx(std::abs(num.imag())).epsilon(1e-5));
    }
  }
}

TEST_CASE("Hopf window of the coupled pair") {
  const PhysicalParams p;
  const double P0 = transparency_pump(p);
  CHECK(supermode_stability(Supermode::Bonding, 6.008 * P0, p).stable());
  CHECK_FALSE(supermode_stability(Supermode::Bonding, 6.010 * P0, p).stable());
  CHECK_FALSE(supermode_stability(Supermode::Antibonding, 6.032 * P0, p).stable());
  CHECK(supermode_stability(Supermode::Antibonding, 6.036 * P0, p).stable());
  // The oscillatory instability beats at roughly the mode splitting 2K.
  const cplx lead = supermode_stability(Supermode::Bonding, 6.010 * P0, p).leading;
  CHECK(std::abs(lead.imag()) == Approx(2.0 * p.K).epsilon(0.02));
  // Depends on beta n0 only.
  const PhysicalParams q = macroscopic_params();
  const cplx lq = supermode_stability(Supermode::Bonding, 6.010 * transparency_pump(q), q).leading;
  CHECK(lq.real() == Approx(lead.real()).epsilon(1e-6));
}

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal streams") {
  NormalStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 1000; ++i) {
    const double va = a.next();
    CHECK(va == b.next());
    differs_c |= va != c.next();
    differs_d |= va != d.next();
  }
  CHECK(differs_c);
  CHECK(differs_d);

  NormalStream s(9, 0);
  constexpr int n = 1000000;
  double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = s.next();
    m1 += v;
    m2 += v * v;
    m3 += v * v * v;
    m4 += v * v * v * v;
  }
  m1 /= n;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 5.0 / std::sqrt(n));
  CHECK(m2 == Approx(1.0).epsilon(0.01));
  CHECK(std::abs(m3) < 5.0 * std::sqrt(15.0 / n));
  CHECK(m4 == Approx(3.0).epsilon(0.02));

  NormalStream u(1, 1);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    CHECK((v > 0.0 && v < 1.0));
  }
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, 0, 0) == derive_seed(1, 0, 0));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
  CHECK(derive_seed(1, 0, 1) != derive_seed(1, 1, 0));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}
