#include "nanolaser/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nanolaser/errors.hpp"

namespace nanolaser {

StateDerivative drift(const CavityState& s, double P, const PhysicalParams& p) {
  const double G1 = gain(s.n1, p);
  const double G2 = gain(s.n2, p);
  const cplx coupling{p.gamma_c, p.K};
  const cplx d1 = 0.5 * cplx{G1, p.alpha * G1} - p.kappa;
  const cplx d2 = 0.5 * cplx{G2, p.alpha * G2} - p.kappa;
  return {d1 * s.a1 + coupling * s.a2, d2 * s.a2 + coupling * s.a1,
          P - p.gamma_tot * s.n1 - G1 * std::norm(s.a1), P - p.gamma_tot * s.n2 - G2 * std::norm(s.a2)};
}

std::pair<cplx, cplx> to_modal(cplx a1, cplx a2) {
  constexpr double r = std::numbers::sqrt2 / 2.0;
  return {(a1 + a2) * r, (a1 - a2) * r};
}

std::pair<cplx, cplx> from_modal(cplx aB, cplx aA) { return to_modal(aB, aA); }

double wrap_phase(double phi) {
  constexpr double pi = std::numbers::pi;
  double w = std::remainder(phi, 2.0 * pi);  // [-pi, pi]
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

ModalFrame modal_frame(const CavityState& s) {
  const double I1 = std::norm(s.a1);
  const double I2 = std::norm(s.a2);
  const double I_tot = I1 + I2;
  if (!(I_tot > 0.0)) throw DegenerateInput("modal_frame: total intensity is zero, x undefined");

  const auto [aB, aA] = to_modal(s.a1, s.a2);
  ModalFrame f;
  f.I_B = std::norm(aB);
  f.I_A = std::norm(aA);
  f.I_tot = I_tot;
  // 2 Re(a1 a2*) / I_tot equals (I_B - I_A) / (I_B + I_A) without the cancellation.
  f.x = std::clamp(2.0 * std::real(s.a1 * std::conj(s.a2)) / I_tot, -1.0, 1.0);
  if (I2 == 0.0) {
    f.theta = 0.0;
  } else if (I1 == 0.0) {
    f.theta = std::numbers::pi;
  } else {
    f.theta = 2.0 * std::atan(std::sqrt(I2 / I1));
  }
  f.phi = (I1 == 0.0 || I2 == 0.0) ? 0.0 : wrap_phase(std::arg(s.a1) - std::arg(s.a2));
  return f;
}

BlochVector bloch_vector(const CavityState& s) {
  const double I_tot = s.total_intensity();
  if (!(I_tot > 0.0)) throw DegenerateInput("bloch_vector: total intensity is zero");
  const cplx c = s.a1 * std::conj(s.a2);
  return {2.0 * c.real() / I_tot, 2.0 * c.imag() / I_tot, (std::norm(s.a1) - std::norm(s.a2)) / I_tot};
}

double order_parameter(double x) {
  const double ax = std::abs(x);
  if (!(ax <= 1.0 + 1e-12)) {
    throw OutOfRange("order_parameter: |x| = " + std::to_string(ax) + " exceeds 1");
  }
  const double xc = std::min(ax, 1.0);
  return std::sqrt((1.0 - xc) * (1.0 + xc));
}

}  // namespace nanolaser
