#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nanolaser/params.hpp"
#include "nanolaser/sde.hpp"

namespace nanolaser {

inline constexpr int kConfigSchema = 1;

/// Every value a driver can read. Defaults describe the coupled pair at
/// beta = 0.017 in its mode-beating window.
struct Settings {
  PhysicalParams physics{};
  double P_over_P0 = 6.015;

  // integrator
  double dt = 2e-4;
  std::size_t record_stride = 1;
  Scheme scheme = Scheme::SplitExponential;
  bool allow_large_dt = false;
  std::uint64_t seed = 1;

  // ensembles
  std::size_t n_traj = 100;
  double relax_ns = 300.0;
  double burn_ns = 20.0;
  double window_ns = 40.0;
  std::size_t sample_stride = 5;
  double thin_ns = 10.0;
  bool fit_lambda = true;

  // single trajectory
  std::size_t trajectory_steps = 1000;
  bool noise = true;

  // sweeps
  std::vector<double> pump_grid{6.008, 6.010, 6.012, 6.016, 6.020, 6.024, 6.028, 6.032, 6.036};
  std::vector<double> beta_grid{1.7e-5, 1.7e-2};

  // ramp
  double ramp_start = 5.8;  // P/P0
  double ramp_end = 6.3;
  double ramp_ns = 6.0;
  double bin_ns = 0.05;
  double detector_bandwidth_GHz = 0.6;

  // histograms
  std::size_t hist_x_bins = 64;
  std::size_t hist_I_bins = 64;

  IntegratorConfig integrator() const;
};

/// Sorted list of accepted keys.
std::vector<std::string> config_keys();

/// Closest accepted key by edit distance.
std::string nearest_key(const std::string& key);

/// Sets one key from its text value. Throws ConfigError (with `line` when
/// positive) on unknown keys or malformed values.
void apply_setting(Settings& s, const std::string& key, const std::string& value, int line = 0);

/// Parses flat "key = value" text; '#' starts a comment. A `schema` key, when
/// present, must equal kConfigSchema.
Settings parse_settings(std::istream& in, Settings base = {});
Settings load_settings(const std::string& path, Settings base = {});

/// "key=value" -> (key, value); throws ConfigError when there is no '='.
std::pair<std::string, std::string> split_override(const std::string& kv);

/// Canonical text form; parse_settings(write_settings(s)) == s.
std::string write_settings(const Settings& s);

bool operator==(const Settings& a, const Settings& b);

}  // namespace nanolaser
