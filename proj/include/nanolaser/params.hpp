#pragma once

#include <cstdint>

namespace nanolaser {

// Rates are in GHz (1/ns), time in ns. Photon and carrier numbers are
// dimensionless counts. B_rec and V_a keep their cgs units.
struct PhysicalParams {
  double kappa = 140.84;        // cavity loss rate
  double alpha = 7.0;           // Henry factor
  double K = 12.0 * 140.84;     // coupling frequency splitting
  double gamma_c = 0.05 * 140.84;  // coupling loss splitting
  double gamma_par = 2.2;       // two-level radiative recombination rate
  double gamma_tot = 5.0;       // total carrier recombination rate
  double beta = 0.017;          // spontaneous emission factor
  double n0 = 1.6e4;            // transparency carrier number
  double F_P = 1.03;            // Purcell factor
  double B_rec = 3e-10;         // bimolecular recombination (cm^3/s)
  double V_a = 0.016e-12;       // active volume (cm^3)

  /// Throws InvalidParams when an invariant is violated.
  void validate() const;

  /// Intracavity saturation photon number gamma_tot / (gamma_par * beta).
  double saturation_photons() const { return gamma_tot / (gamma_par * beta); }

  /// Transparency carrier density n0 / V_a (cm^-3).
  double transparency_density() const { return n0 / V_a; }

  bool operator==(const PhysicalParams&) const = default;
};

/// Mesoscopic coupled pair (beta = 0.017).
PhysicalParams mesoscopic_params();

/// Same device scaled to beta = 1.7e-5, V_a = 16e-12 cm^3.
PhysicalParams macroscopic_params();

/// Returns p at spontaneous-emission factor beta with V_a ∝ 1/beta and the
/// transparency density held fixed. The noiseless dynamics depend on beta*n0
/// only, which this scaling preserves.
PhysicalParams coscale_beta(const PhysicalParams& p, double beta);

/// 64-bit FNV-1a hash over the exact bit patterns of all fields.
std::uint64_t params_hash(const PhysicalParams& p);

enum class PumpKind { Constant, LinearRamp };

/// Pump rate P(t) in carriers/ns.
struct PumpSchedule {
  PumpKind kind = PumpKind::Constant;
  double P_start = 0.0;
  double P_end = 0.0;
  double duration = 0.0;  // ns

  static PumpSchedule constant(double P, double duration);
  static PumpSchedule ramp(double P_start, double P_end, double duration);

  double at(double t) const {
    if (kind == PumpKind::Constant || duration <= 0.0) return P_start;
    const double f = t <= 0.0 ? 0.0 : (t >= duration ? 1.0 : t / duration);
    return P_start + (P_end - P_start) * f;
  }

  void validate() const;
};

}  // namespace nanolaser
