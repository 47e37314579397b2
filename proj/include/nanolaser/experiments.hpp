#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nanolaser/ensemble.hpp"
#include "nanolaser/params.hpp"
#include "nanolaser/stability.hpp"
#include "nanolaser/stats.hpp"

namespace nanolaser {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Attractor { FixedPointB, FixedPointA, LimitCycle, Unresolved };
const char* attractor_name(Attractor a);

struct NoiselessOptions {
  double dt = 2e-4;
  double relax_ns = 300.0;    // transient discard
  double measure_ns = 10.0;   // window for amplitude, period and drift
  double oscillation_tol = 1e-3;  // peak-to-peak of z
  double drift_tol = 1e-3;    // |change of <x>| between window halves
};

/// Noiseless attractor at one pump value.
struct AttractorInfo {
  double P_over_P0 = 0.0;
  Attractor kind = Attractor::Unresolved;
  double x = kNaN;          // time-averaged imbalance on the attractor
  double amplitude = kNaN;  // order parameter sqrt(1 - x^2)
  double z_peak_to_peak = 0.0;
  double period_ns = kNaN;  // limit cycles only
  double lead_B = kNaN;     // leading real part of the bonding fixed point (1/ns)
  double lead_A = kNaN;
  bool converged = true;
  CavityState final_state{};
};

AttractorInfo classify_attractor(double P_over_P0, const PhysicalParams& p, const NoiselessOptions& opts = {});

/// One control value of a sweep.
struct SweepPoint {
  double control = 0.0;  // P/P0, or beta for beta sweeps
  CorrelationSet corr;
  double noiseless_amplitude = kNaN;
  double noiseless_period_ns = kNaN;
  Attractor attractor = Attractor::Unresolved;
  bool converged = true;
  bool below_threshold = false;  // no lasing supermode; <A> is spontaneous noise
  std::optional<EquilibriumFit> lambda_fit;
  std::optional<JointHistogram> histogram;
  std::size_t clamp_count = 0;

  // beta sweeps
  double min_g2_BA = kNaN;
  double argmin_P_over_P0 = kNaN;
  double max_A2 = kNaN;
  std::size_t dips = 0;
};

struct SweepResult {
  std::string control_name;  // "P_over_P0" or "beta"
  double beta = kNaN;        // for pump sweeps
  std::vector<SweepPoint> points;
  std::vector<double> bifurcations;       // P/P0 of the Hopf points
  std::optional<double> switching_point;  // P_s / P0 from the <x> zero crossing

  std::vector<double> controls() const;
};

/// Pump grids must be strictly increasing.
void require_monotone(const std::vector<double>& grid, const char* what);

/// Noiseless scan; bifurcations holds the loss of stability of B and the
/// gain of stability of A, located by bisection on the eigenvalues between
/// grid points where the stability changes.
SweepResult bifurcation_scan(const std::vector<double>& pump_grid, const PhysicalParams& p,
                             const NoiselessOptions& opts = {});

/// Pump (P/P0) where the leading real part of the supermode's linearisation
/// crosses zero inside [lo, hi], or nullopt when it does not change sign.
std::optional<double> hopf_point(Supermode mode, double lo, double hi, const PhysicalParams& p);

struct StationaryOptions {
  std::size_t n_traj = 100;
  std::uint64_t seed = 1;
  std::size_t lanes = 0;
  double dt = 2e-4;
  StationaryWindow window{};
  double thin_ns = 10.0;  // spacing of samples entering the Lambda fit
  bool fit_lambda = false;
  bool histograms = false;
  double hist_retain_ns = 0.05;  // sample spacing entering the histograms
  std::size_t hist_x_bins = 64;   // over [-1, 1]
  std::size_t hist_I_bins = 64;   // over [0, 3 <I_tot>]
  NoiselessOptions noiseless{};
};

/// One SweepResult per beta (V_a co-scaled). Every pump point starts from
/// its noiseless attractor and uses seed derive_seed(seed, beta index, point).
std::vector<SweepResult> stationary_scan(const std::vector<double>& pump_grid, const std::vector<double>& betas,
                                         const PhysicalParams& p, const StationaryOptions& opts);

/// First downward zero crossing of y(control), linearly interpolated.
std::optional<double> zero_crossing(const std::vector<double>& control, const std::vector<double>& y);

/// Pump window (P/P0) where <A> exceeds half of its maximum over the scan.
double order_parameter_window(const SweepResult& scan);

/// Interior local minima of a profile whose prominence exceeds
/// rel_prominence times the profile range.
std::vector<std::size_t> find_dips(const std::vector<double>& profile, double rel_prominence = 0.3);

struct RampOptions {
  std::size_t n_traj = 100;
  std::uint64_t seed = 1;
  std::size_t lanes = 0;
  double dt = 2e-4;
  double bin_ns = 0.05;
  std::size_t sample_stride = 5;
  double detector_bandwidth_GHz = 0.0;  // 0 disables the detector filter
  InitOptions init{};
};

/// Time-resolved ensemble statistics of a pump ramp.
struct RampResult {
  std::vector<double> t_ns;       // bin centres
  std::vector<double> P_over_P0;  // pump at bin centres
  std::vector<CorrelationSet> full;
  std::vector<ReconstructedMoments> from_g2;  // moments rebuilt from the g2 values only
  std::vector<AmplitudeEstimate> amplitude_from_g2;
  std::vector<CorrelationSet> filtered;  // detector-filtered intensities, when enabled
  std::optional<double> switching_time_ns;
  std::optional<double> switching_point;  // P_s / P0
};

RampResult ramp_experiment(const PumpSchedule& ramp, const PhysicalParams& p, const RampOptions& opts);

/// Per beta: min over pump of g2_BA, max over pump of <A>^2 and the number of
/// g2_BA dips. V_a is co-scaled with beta.
SweepResult beta_sweep(const std::vector<double>& betas, const std::vector<double>& pump_grid, const PhysicalParams& p,
                       const StationaryOptions& opts);

struct LambdaLinearity {
  double P_s = kNaN;  // P/P0
  std::vector<double> u;  // P / P_s - 1
  std::vector<double> Lambda;
  LinearFit fit;
  bool sign_change = false;
};

/// Linear fit of the fitted Lambda against P/P_s - 1 over the points within
/// half_width (in P/P0) of the switching point.
LambdaLinearity lambda_linearity(const SweepResult& scan, double half_width);

}  // namespace nanolaser
