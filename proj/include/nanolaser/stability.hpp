#pragma once

#include <optional>

#include "nanolaser/model.hpp"

namespace nanolaser {

enum class Supermode { Bonding, Antibonding };

/// Single-supermode lasing solution a1 = ±a2 = sqrt(I) e^{i omega t}.
struct PhaseLockedState {
  Supermode mode;
  CavityState state;      // at t = 0, real positive a1
  double omega;           // rotation rate of the fields (rad/ns)
  double threshold_gain;  // 2 (kappa ∓ gamma_c)
};

/// Pump at which the supermode reaches threshold.
double threshold_pump(Supermode mode, const PhysicalParams& p);

/// Lasing fixed point of the supermode, or nullopt at or below its threshold.
std::optional<PhaseLockedState> phase_locked_state(Supermode mode, double P, const PhysicalParams& p);

/// Stability of a phase-locked state from the spectrum of the 6x6 Jacobian in
/// the frame co-rotating with the fields. The zero eigenvalue of the global
/// phase symmetry is removed before picking the leading eigenvalue.
struct StabilityReport {
  bool exists = false;
  cplx leading{};  // eigenvalue with the largest real part (1/ns)
  bool stable() const { return exists && leading.real() < 0.0; }
};

StabilityReport supermode_stability(Supermode mode, double P, const PhysicalParams& p);

}  // namespace nanolaser
