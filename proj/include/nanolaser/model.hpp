#pragma once

#include <complex>
#include <utility>

#include "nanolaser/params.hpp"

namespace nanolaser {

using cplx = std::complex<double>;

/// Two intracavity fields (|a|^2 = photon number) and carrier numbers at time t.
struct CavityState {
  cplx a1{};
  cplx a2{};
  double n1 = 0.0;
  double n2 = 0.0;
  double t = 0.0;  // ns

  double I1() const { return std::norm(a1); }
  double I2() const { return std::norm(a2); }
  double total_intensity() const { return std::norm(a1) + std::norm(a2); }

  bool operator==(const CavityState&) const = default;
};

/// Time derivative of a CavityState (t component omitted).
struct StateDerivative {
  cplx da1{};
  cplx da2{};
  double dn1 = 0.0;
  double dn2 = 0.0;
};

struct ModalFrame {
  double I_B = 0.0;
  double I_A = 0.0;
  double I_tot = 0.0;
  double x = 0.0;      // mode population imbalance in [-1, 1]
  double theta = 0.0;  // polar Bloch angle in [0, pi]
  double phi = 0.0;    // relative phase psi1 - psi2 in (-pi, pi]
};

/// Cartesian Bloch vector (x, y, z); x is the mode imbalance, z = (I1 - I2) / I_tot.
struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Modal gain gamma_par * beta * (n - n0) in GHz. Negative below transparency.
inline double gain(double n, const PhysicalParams& p) { return p.gamma_par * p.beta * (n - p.n0); }

/// Spontaneous emission rate into the mode, beta F_P B n^2 / V_a, in 1/ns.
inline double spontaneous_rate(double n, const PhysicalParams& p) {
  return p.beta * p.F_P * p.B_rec * n * n / p.V_a * 1e-9;
}

/// Transparency pump P0 = gamma_tot * n0 (carriers/ns).
inline double transparency_pump(const PhysicalParams& p) { return p.gamma_tot * p.n0; }

/// Deterministic right-hand side of the coupled rate equations.
StateDerivative drift(const CavityState& s, double P, const PhysicalParams& p);

/// (a_B, a_A) = ((a1 + a2)/sqrt2, (a1 - a2)/sqrt2).
std::pair<cplx, cplx> to_modal(cplx a1, cplx a2);

/// Inverse of to_modal.
std::pair<cplx, cplx> from_modal(cplx aB, cplx aA);

/// Throws DegenerateInput when the total intensity is zero.
ModalFrame modal_frame(const CavityState& s);

/// Throws DegenerateInput when the total intensity is zero.
BlochVector bloch_vector(const CavityState& s);

/// Limit-cycle order parameter sqrt(1 - x^2). Values within 1e-12 outside
/// [-1, 1] are clamped; beyond that throws OutOfRange.
double order_parameter(double x);

/// Cavity 1 <-> 2 mirror image of a state.
inline CavityState swapped(const CavityState& s) { return {s.a2, s.a1, s.n2, s.n1, s.t}; }

/// Wraps an angle to (-pi, pi].
double wrap_phase(double phi);

}  // namespace nanolaser
