#include "nanolaser/stability.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace nanolaser {

namespace {

double sign_of(Supermode m) { return m == Supermode::Bonding ? 1.0 : -1.0; }

// Writes the real 2x2 block of multiplication by c into J at (row, col).
void put_complex(Eigen::Matrix<double, 6, 6>& J, int row, int col, cplx c) {
  J(row, col) = c.real();
  J(row, col + 1) = -c.imag();
  J(row + 1, col) = c.imag();
  J(row + 1, col + 1) = c.real();
}

}  // namespace

double threshold_pump(Supermode mode, const PhysicalParams& p) {
  const double g_th = 2.0 * (p.kappa - sign_of(mode) * p.gamma_c);
  return p.gamma_tot * (p.n0 + g_th / (p.gamma_par * p.beta));
}

std::optional<PhaseLockedState> phase_locked_state(Supermode mode, double P, const PhysicalParams& p) {
  const double s = sign_of(mode);
  const double g_th = 2.0 * (p.kappa - s * p.gamma_c);
  const double n = p.n0 + g_th / (p.gamma_par * p.beta);
  const double I = (P - p.gamma_tot * n) / g_th;
  if (!(I > 0.0)) return std::nullopt;
  const double amp = std::sqrt(I);
  PhaseLockedState out{mode, CavityState{cplx{amp, 0.0}, cplx{s * amp, 0.0}, n, n, 0.0},
                       p.alpha * (p.kappa - s * p.gamma_c) + s * p.K, g_th};
  return out;
}

StabilityReport supermode_stability(Supermode mode, double P, const PhysicalParams& p) {
  const auto fp = phase_locked_state(mode, P, p);
  if (!fp) return {};

  // Variables (Re a1, Im a1, Re a2, Im a2, n1, n2) in the co-rotating frame.
  const CavityState& s = fp->state;
  const double gb = p.gamma_par * p.beta;
  const cplx self = 0.5 * cplx{fp->threshold_gain, p.alpha * fp->threshold_gain} - p.kappa -
                    cplx{0.0, fp->omega};
  const cplx coupling{p.gamma_c, p.K};

  Eigen::Matrix<double, 6, 6> J = Eigen::Matrix<double, 6, 6>::Zero();
  put_complex(J, 0, 0, self);
  put_complex(J, 0, 2, coupling);
  put_complex(J, 2, 2, self);
  put_complex(J, 2, 0, coupling);

  const cplx dgain = 0.5 * gb * cplx{1.0, p.alpha};
  const cplx f1 = dgain * s.a1;
  const cplx f2 = dgain * s.a2;
  J(0, 4) = f1.real();
  J(1, 4) = f1.imag();
  J(2, 5) = f2.real();
  J(3, 5) = f2.imag();

  const double G = fp->threshold_gain;
  J(4, 0) = -2.0 * G * s.a1.real();
  J(4, 1) = -2.0 * G * s.a1.imag();
  J(4, 4) = -p.gamma_tot - gb * std::norm(s.a1);
  J(5, 2) = -2.0 * G * s.a2.real();
  J(5, 3) = -2.0 * G * s.a2.imag();
  J(5, 5) = -p.gamma_tot - gb * std::norm(s.a2);

  Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> solver(J, false);
  const auto ev = solver.eigenvalues();
  int goldstone = 0;
  for (int i = 1; i < 6; ++i) {
    if (std::abs(ev[i]) < std::abs(ev[goldstone])) goldstone = i;
  }
  StabilityReport r;
  r.exists = true;
  bool first = true;
  for (int i = 0; i < 6; ++i) {
    if (i == goldstone) continue;
    const cplx e = ev[i];
    if (first || e.real() > r.leading.real() ||
        (e.real() == r.leading.real() && e.imag() > r.leading.imag())) {
      r.leading = e;
      first = false;
    }
  }
  return r;
}

}  // namespace nanolaser
