#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nanolaser/model.hpp"
#include "nanolaser/params.hpp"
#include "nanolaser/rng.hpp"

namespace nanolaser {

enum class Scheme {
  /// Strang split: exact carrier half-steps at frozen |a|^2, exact 2x2 field
  /// propagator at the midpoint carriers, Ito noise on the fields.
  SplitExponential,
  /// Plain explicit Euler-Maruyama on fields and carriers.
  EulerMaruyama,
};

struct IntegratorConfig {
  double dt = 2e-4;  // ns
  Scheme scheme = Scheme::SplitExponential;
  std::uint64_t seed = 1;
  std::size_t record_stride = 1;
  bool noise = true;             // false forces R_sp = 0
  bool allow_large_dt = false;   // lifts the dt * kappa <= 0.1 guard

  void validate(const PhysicalParams& p) const;
};

struct NoiseIncrement {
  cplx dW1{};
  cplx dW2{};
};

/// Normals consumed by one step, in order (Re dW1, Im dW1, Re dW2, Im dW2).
using StepNormals = std::array<double, 4>;

/// dW_i = sqrt(R_sp(n_i) dt / 2) (xi_re + i xi_im), so <|dW_i|^2> = R_sp dt
/// and <dW_i^2> = 0.
NoiseIncrement noise_increment(const CavityState& s, double dt, const PhysicalParams& p, const StepNormals& xi);
NoiseIncrement noise_increment(const CavityState& s, double dt, const PhysicalParams& p, NormalStream& rng);

struct StepDiagnostics {
  std::size_t clamp_count = 0;  // carrier values clamped at zero
};

/// One step with prescribed normals. Noise amplitudes use the carriers at the
/// start of the step. Throws IntegrationError on a non-finite result.
CavityState advance(const CavityState& s, double P, const PhysicalParams& p, const IntegratorConfig& cfg,
                    const StepNormals& xi, StepDiagnostics& diag);

/// One step drawing four normals from rng (none when cfg.noise is false).
CavityState step(const CavityState& s, double P, const PhysicalParams& p, const IntegratorConfig& cfg,
                 NormalStream& rng, StepDiagnostics& diag);

/// Deterministic step of length h (any h > 0), used for event location.
CavityState noiseless_step(const CavityState& s, double P, const PhysicalParams& p, Scheme scheme, double h);

struct TrajectoryRecord {
  std::vector<CavityState> samples;  // every record_stride steps, t = 0 included
  StepDiagnostics diagnostics;
  double dt = 0.0;
  std::size_t record_stride = 1;
  std::uint64_t seed = 0;

  std::vector<double> times() const;
  ModalFrame frame(std::size_t i) const { return modal_frame(samples[i]); }
};

/// Integrates over the schedule duration with pump evaluated at each step
/// midpoint. Deterministic in (rng position, cfg, p, schedule).
TrajectoryRecord integrate(const CavityState& initial, const PumpSchedule& schedule, const PhysicalParams& p,
                           const IntegratorConfig& cfg, NormalStream& rng);

/// Number of whole steps covering a duration.
std::size_t step_count(double duration, double dt);

/// Runs `steps` steps and calls visit(state, step_index) after every step.
template <class Visit>
CavityState evolve(CavityState s, const PumpSchedule& schedule, const PhysicalParams& p, const IntegratorConfig& cfg,
                   NormalStream& rng, std::size_t steps, StepDiagnostics& diag, Visit&& visit) {
  const double t0 = s.t;
  for (std::size_t k = 0; k < steps; ++k) {
    const double P = schedule.at(s.t + 0.5 * cfg.dt);
    s = step(s, P, p, cfg, rng, diag);
    s.t = t0 + static_cast<double>(k + 1) * cfg.dt;
    visit(s, k + 1);
  }
  return s;
}

/// Noiseless relaxation for a fixed duration at constant pump.
CavityState relax(CavityState s, double P, const PhysicalParams& p, double duration, double dt,
                  Scheme scheme = Scheme::SplitExponential);

}  // namespace nanolaser
