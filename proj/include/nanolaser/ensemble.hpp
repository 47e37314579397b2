#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nanolaser/model.hpp"
#include "nanolaser/sde.hpp"
#include "nanolaser/stats.hpp"

namespace nanolaser {

enum class InitPolicy {
  /// On the noiseless attractor at pump P, advanced to the point where
  /// cavity 1 holds the photon maximum: Phi in {0, pi}, theta <= pi/2.
  PhaseAligned,
  /// The supplied state, unchanged.
  FixedState,
  /// Noiseless relaxation at pump P from the stable supermode when one
  /// exists, otherwise from the equator of the Bloch sphere.
  RelaxedSteadyState,
};

enum class Reduction { MomentsOnly, FullSamples };

struct InitOptions {
  double relax_ns = 300.0;
  double dt = 2e-4;
  CavityState fixed_state{};
};

/// Trajectories are processed in fixed blocks of this many, merged in block
/// order; the partition does not depend on the lane count.
inline constexpr std::size_t kTrajectoryBlock = 8;

struct EnsembleConfig {
  std::size_t n_traj = 100;
  std::uint64_t master_seed = 1;
  InitPolicy init_policy = InitPolicy::PhaseAligned;
  Reduction reduction = Reduction::MomentsOnly;
  std::size_t lanes = 0;  // 0: default_lanes()
  InitOptions init;

  void validate() const;
};

CavityState initial_condition(InitPolicy policy, const PhysicalParams& p, double P, const InitOptions& opts);

/// State with imbalance x and total intensity I_tot placed at Phi in {0, pi},
/// theta = arcsin|x| <= pi/2, both carriers at n.
CavityState phase_aligned_state(double x, double I_tot, double n);

struct EnsembleResult {
  std::vector<double> times;
  std::vector<MomentAccumulator> modal;  // per time point
  std::vector<ScalarMoments> I1;
  std::vector<ScalarMoments> I2;
  std::size_t n_traj = 0;
  std::uint64_t master_seed = 0;
  std::size_t clamp_count = 0;
  std::vector<TrajectoryRecord> trajectories;  // Reduction::FullSamples only

  std::vector<double> mean_I1() const;
};

/// n_traj trajectories with streams (master_seed, index). Throws
/// EnsembleError listing every failed trajectory.
EnsembleResult run_ensemble(const EnsembleConfig& cfg, const PumpSchedule& schedule, const PhysicalParams& p,
                            const IntegratorConfig& icfg);

struct EnvelopeFit {
  double decay_rate = 0.0;  // 1/ns; 0 when the change is below the noise floor
  double initial_amplitude = 0.0;
  double residual_rms = 0.0;
  bool below_noise_floor = false;
  std::vector<double> times;
  std::vector<double> envelope;
};

/// Complex demodulation of a mean intensity trace at the beat frequency
/// K / pi (cycles/ns) over 10-period windows, then a least-squares fit of
/// E0 exp(-lambda t). Needs >= 20 beat periods; throws FitError when the
/// residual exceeds 30% of E0.
EnvelopeFit fit_envelope(std::span<const double> mean_trace, double dt, double K);

inline double envelope_decay(std::span<const double> mean_trace, double dt, double K) {
  return fit_envelope(mean_trace, dt, K).decay_rate;
}

// ---------------------------------------------------------------------------
// Stationary sampling at constant pump

struct StationaryWindow {
  double burn_ns = 20.0;
  double window_ns = 40.0;
  std::size_t sample_stride = 5;  // steps between accumulator samples
  double retain_ns = 0.0;         // spacing of retained mode-intensity series; 0 keeps none
};

struct ModalSeries {
  std::vector<double> I_B;
  std::vector<double> I_A;
  double spacing_ns = 0.0;
};

struct StationarySamples {
  MomentAccumulator moments;
  std::vector<ModalSeries> series;  // per trajectory, when retained
  CavityState start{};
  std::size_t clamp_count = 0;

  /// Imbalance values of all retained samples, trajectory-major.
  std::vector<double> x_values() const;
  std::vector<double> Itot_values() const;
  /// Retained imbalance values taken every thin_ns within each trajectory.
  std::vector<double> thinned_x(double thin_ns) const;
};

/// Every trajectory starts from the same relaxed noiseless state, runs a
/// noisy burn-in, then accumulates over the window.
StationarySamples sample_stationary(const EnsembleConfig& cfg, double P, const PhysicalParams& p,
                                    const IntegratorConfig& icfg, const StationaryWindow& win);

}  // namespace nanolaser
