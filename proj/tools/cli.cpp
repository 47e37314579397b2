#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nanolaser/ensemble.hpp"
#include "nanolaser/errors.hpp"
#include "nanolaser/experiments.hpp"
#include "nanolaser/parallel.hpp"

#ifndef NANOLASER_VERSION
#define NANOLASER_VERSION "0.0.0"
#endif

namespace nanolaser::cli {

namespace {

constexpr std::pair<Experiment, const char*> kNames[] = {
    {Experiment::Bifurcation, "bifurcation"}, {Experiment::Stationary, "stationary"}, {Experiment::Ramp, "ramp"},
    {Experiment::BetaSweep, "beta-sweep"},    {Experiment::Trajectory, "trajectory"},
};

const char* figure_id(Experiment e) {
  switch (e) {
    case Experiment::Bifurcation:
      return "1b";
    case Experiment::Stationary:
      return "1e-f";
    case Experiment::Ramp:
      return "2";
    case Experiment::BetaSweep:
      return "4";
    case Experiment::Trajectory:
      return "1c-d";
  }
  return "";
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// CSV table at full double precision.
class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::vector<std::string>& header,
      const std::vector<std::string>& comments = {})
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << std::setprecision(17);
    for (const auto& c : comments) out_ << "# " << c << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  template <class... T>
  void row(const T&... v) {
    bool first = true;
    ((out_ << (first ? "" : ",") << v, first = false), ...);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

StationaryOptions stationary_options(const RunConfig& cfg) {
  const Settings& s = cfg.settings;
  StationaryOptions o;
  o.n_traj = s.n_traj;
  o.seed = s.seed;
  o.lanes = cfg.lanes;
  o.dt = s.dt;
  o.window.burn_ns = s.burn_ns;
  o.window.window_ns = s.window_ns;
  o.window.sample_stride = s.sample_stride;
  o.thin_ns = s.thin_ns;
  o.fit_lambda = s.fit_lambda;
  o.hist_x_bins = s.hist_x_bins;
  o.hist_I_bins = s.hist_I_bins;
  o.noiseless.dt = s.dt;
  o.noiseless.relax_ns = s.relax_ns;
  return o;
}

RunOutcome run_bifurcation(const RunConfig& cfg) {
  const Settings& s = cfg.settings;
  NoiselessOptions o;
  o.dt = s.dt;
  o.relax_ns = s.relax_ns;
  const SweepResult r = bifurcation_scan(s.pump_grid, s.physics, o);
  Csv csv(cfg.out_dir / "bifurcation.csv",
          {"P_over_P0", "attractor", "x", "amplitude", "period_ns", "beat_GHz", "converged"});
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points) {
    const double beat = 1.0 / p.noiseless_period_ns;
    csv.row(p.control, attractor_name(p.attractor), p.corr.mean_x, p.noiseless_amplitude, p.noiseless_period_ns, beat,
            p.converged ? 1 : 0);
    pts.push_back({{"P_over_P0", p.control}, {"attractor", attractor_name(p.attractor)}});
  }
  return {{"bifurcation.csv"}, {{"hopf_points_P_over_P0", r.bifurcations}, {"points", pts}}};
}

RunOutcome run_stationary(const RunConfig& cfg) {
  const Settings& s = cfg.settings;
  StationaryOptions o = stationary_options(cfg);
  o.histograms = true;
  const auto scans = stationary_scan(s.pump_grid, s.beta_grid, s.physics, o);
  Csv table(cfg.out_dir / "stationary.csv",
            {"beta", "P_over_P0", "g2_BB", "g2_AA", "g2_BA", "g2_II", "mean_x", "var_x", "mean_A", "var_A",
             "Lambda", "Lambda_stderr", "ks_pvalue", "attractor", "below_threshold", "clamp_count"});
  Csv hist(cfg.out_dir / "histograms.csv",
           {"beta", "P_over_P0", "x_lo", "x_hi", "I_lo", "I_hi", "count"});
  nlohmann::json per_beta = nlohmann::json::array();
  for (const auto& scan : scans) {
    for (const auto& p : scan.points) {
      const auto& c = p.corr;
      const double L = p.lambda_fit ? p.lambda_fit->Lambda : kNaN;
      const double Le = p.lambda_fit ? p.lambda_fit->stderr_lambda : kNaN;
      const double ks = p.lambda_fit ? p.lambda_fit->ks_pvalue : kNaN;
      table.row(scan.beta, p.control, c.g2_BB, c.g2_AA, c.g2_BA, c.g2_II, c.mean_x, c.var_x, c.mean_A, c.var_A, L, Le,
                ks, attractor_name(p.attractor), p.below_threshold ? 1 : 0, p.clamp_count);
      if (p.histogram) {
        const auto& h = *p.histogram;
        for (std::size_t i = 0; i < h.x_bins(); ++i) {
          for (std::size_t j = 0; j < h.I_bins(); ++j) {
            if (h.at(i, j) == 0) continue;
            hist.row(scan.beta, p.control, h.x_edges[i], h.x_edges[i + 1], h.I_edges[j], h.I_edges[j + 1], h.at(i, j));
          }
        }
      }
    }
    double maxA = 0.0;
    for (const auto& p : scan.points) maxA = std::max(maxA, p.corr.mean_A);
    per_beta.push_back({{"beta", scan.beta},
                        {"switching_point_P_over_P0", opt(scan.switching_point)},
                        {"max_mean_A", maxA},
                        {"order_parameter_window", order_parameter_window(scan)}});
  }
  return {{"stationary.csv", "histograms.csv"}, {{"per_beta", per_beta}}};
}

RunOutcome run_ramp(const RunConfig& cfg) {
  const Settings& s = cfg.settings;
  const double P0 = transparency_pump(s.physics);
  const PumpSchedule ramp = PumpSchedule::ramp(s.ramp_start * P0, s.ramp_end * P0, s.ramp_ns);
  RampOptions o;
  o.n_traj = s.n_traj;
  o.seed = s.seed;
  o.lanes = cfg.lanes;
  o.dt = s.dt;
  o.bin_ns = s.bin_ns;
  o.sample_stride = s.sample_stride;
  o.detector_bandwidth_GHz = s.detector_bandwidth_GHz;
  o.init.dt = s.dt;
  o.init.relax_ns = s.relax_ns;
  const RampResult r = ramp_experiment(ramp, s.physics, o);
  const bool filt = !r.filtered.empty();
  std::vector<std::string> head{"t_ns",   "P_over_P0",  "g2_BB",     "g2_AA",     "g2_BA", "g2_II",
                                "mean_x", "var_x",      "mean_A",    "var_A",     "mean_IB", "mean_IA",
                                "g2only_mean_x", "g2only_var_x", "g2only_mean_A"};
  if (filt) {
    for (const char* k : {"det_g2_BB", "det_g2_AA", "det_g2_BA", "det_mean_x", "det_var_x", "det_mean_IB", "det_mean_IA"}) {
      head.push_back(k);
    }
  }
  std::ofstream os(cfg.out_dir / "ramp.csv");
  os << std::setprecision(17);
  for (std::size_t i = 0; i < head.size(); ++i) os << (i ? "," : "") << head[i];
  os << '\n';
  for (std::size_t i = 0; i < r.t_ns.size(); ++i) {
    const auto& c = r.full[i];
    const auto& g = r.from_g2[i];
    os << r.t_ns[i] << ',' << r.P_over_P0[i] << ',' << c.g2_BB << ',' << c.g2_AA << ',' << c.g2_BA << ',' << c.g2_II
       << ',' << c.mean_x << ',' << c.var_x << ',' << c.mean_A << ',' << c.var_A << ',' << c.mean_IB << ','
       << c.mean_IA << ',' << g.mean_x << ',' << g.var_x << ',' << r.amplitude_from_g2[i].mean_A;
    if (filt) {
      const auto& d = r.filtered[i];
      os << ',' << d.g2_BB << ',' << d.g2_AA << ',' << d.g2_BA << ',' << d.mean_x << ',' << d.var_x << ','
         << d.mean_IB << ',' << d.mean_IA;
    }
    os << '\n';
  }
  return {{"ramp.csv"},
          {{"switching_time_ns", opt(r.switching_time_ns)},
           {"switching_point_P_over_P0", opt(r.switching_point)},
           {"amplitude_from_g2_is_approximate", true},
           {"detector_bandwidth_GHz", s.detector_bandwidth_GHz}}};
}

RunOutcome run_beta_sweep(const RunConfig& cfg) {
  const Settings& s = cfg.settings;
  const SweepResult r = beta_sweep(s.beta_grid, s.pump_grid, s.physics, stationary_options(cfg));
  Csv csv(cfg.out_dir / "beta_sweep.csv",
          {"beta", "inv_beta", "min_g2_BA", "argmin_P_over_P0", "max_A2", "dips"});
  for (const auto& p : r.points) {
    csv.row(p.control, 1.0 / p.control, p.min_g2_BA, p.argmin_P_over_P0, p.max_A2, p.dips);
  }
  return {{"beta_sweep.csv"}, {{"rows", r.points.size()}}};
}

RunOutcome run_trajectory(const RunConfig& cfg) {
  const Settings& s = cfg.settings;
  const double P = s.P_over_P0 * transparency_pump(s.physics);
  InitOptions init;
  init.dt = s.dt;
  init.relax_ns = s.relax_ns;
  const CavityState start = initial_condition(InitPolicy::PhaseAligned, s.physics, P, init);
  IntegratorConfig ic = s.integrator();
  NormalStream rng(s.seed, 0);
  const auto rec =
      integrate(start, PumpSchedule::constant(P, static_cast<double>(s.trajectory_steps) * s.dt), s.physics, ic, rng);
  Csv csv(cfg.out_dir / "trajectory.csv",
          {"t_ns", "re_a1", "im_a1", "re_a2", "im_a2", "n1", "n2", "I_B", "I_A", "x", "theta", "phi"},
          {"params_hash=" + hex64(params_hash(s.physics)), "seed=" + std::to_string(s.seed),
           "record_stride=" + std::to_string(s.record_stride)});
  // The initial state is not a recorded sample: rows = steps / record_stride.
  for (std::size_t i = 1; i < rec.samples.size(); ++i) {
    const auto& st = rec.samples[i];
    const ModalFrame f = modal_frame(st);
    csv.row(st.t, st.a1.real(), st.a1.imag(), st.a2.real(), st.a2.imag(), st.n1, st.n2, f.I_B, f.I_A, f.x, f.theta,
            f.phi);
  }
  return {{"trajectory.csv"},
          {{"rows", rec.samples.size() - 1}, {"clamp_count", rec.diagnostics.clamp_count}}};
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::optional<Experiment> experiment_from_name(std::string_view name) {
  for (const auto& [e, n] : kNames) {
    if (name == n) return e;
  }
  if (name == "single-trajectory") return Experiment::Trajectory;
  return std::nullopt;
}

const char* experiment_name(Experiment e) {
  for (const auto& [k, n] : kNames) {
    if (k == e) return n;
  }
  return "";
}

RunConfig parse_config(Experiment experiment, const std::string& params_path, const std::vector<std::string>& overrides,
                       std::optional<std::uint64_t> seed, const std::filesystem::path& out_dir,
                       std::optional<std::size_t> lanes) {
  RunConfig c;
  c.experiment = experiment;
  c.params_path = params_path;
  c.out_dir = out_dir;
  c.settings = params_path.empty() ? Settings{} : load_settings(params_path);
  for (const auto& kv : overrides) {
    auto [k, v] = split_override(kv);
    try {
      apply_setting(c.settings, k, v);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("--set ") + e.what());
    }
    c.overrides.emplace_back(k, v);
  }
  if (seed) c.settings.seed = *seed;
  c.seed = c.settings.seed;
  c.lanes = lanes.value_or(default_lanes());
  if (c.lanes == 0) throw ConfigError("--lanes must be >= 1");
  c.settings.physics.validate();
  return c;
}

RunOutcome run(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  RunOutcome out;
  switch (cfg.experiment) {
    case Experiment::Bifurcation:
      out = run_bifurcation(cfg);
      break;
    case Experiment::Stationary:
      out = run_stationary(cfg);
      break;
    case Experiment::Ramp:
      out = run_ramp(cfg);
      break;
    case Experiment::BetaSweep:
      out = run_beta_sweep(cfg);
      break;
    case Experiment::Trajectory:
      out = run_trajectory(cfg);
      break;
  }
  {
    std::ofstream echo(cfg.out_dir / "config.echo.params");
    echo << "# resolved configuration of a " << experiment_name(cfg.experiment) << " run\n"
         << write_settings(cfg.settings);
  }
  out.files.push_back("config.echo.params");

  nlohmann::json settings = nlohmann::json::object();
  {
    std::istringstream is(write_settings(cfg.settings));
    std::string line;
    while (std::getline(is, line)) {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) settings[line.substr(0, eq)] = line.substr(eq + 3);
    }
  }
  nlohmann::json overrides = nlohmann::json::array();
  for (const auto& [k, v] : cfg.overrides) overrides.push_back(k + "=" + v);
  const nlohmann::json manifest = {
      {"schema", kConfigSchema},
      {"tool", "nanolaser"},
      {"version", NANOLASER_VERSION},
      {"experiment", experiment_name(cfg.experiment)},
      {"figure", figure_id(cfg.experiment)},
      {"params_hash", hex64(params_hash(cfg.settings.physics))},
      {"seed", cfg.settings.seed},
      {"lanes", cfg.lanes},
      {"params_file", cfg.params_path},
      {"overrides", overrides},
      {"settings", settings},
      {"files", out.files},
      {"summary", out.summary},
      {"created_utc", utc_now()},
  };
  std::ofstream(cfg.out_dir / "manifest.json") << manifest.dump(2) << '\n';
  return out;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Langevin simulations of two coupled semiconductor nanolasers"};
  app.set_version_flag("--version", NANOLASER_VERSION);
  app.require_subcommand(1);

  std::string params_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::optional<std::size_t> lanes;

  const std::pair<Experiment, const char*> help[] = {
      {Experiment::Bifurcation, "noiseless attractor scan over pump_grid"},
      {Experiment::Stationary, "stationary statistics over pump_grid for each beta in beta_grid"},
      {Experiment::Ramp, "time-resolved ensemble statistics of a linear pump ramp"},
      {Experiment::BetaSweep, "g2_BA minimum and <A>^2 maximum versus beta"},
      {Experiment::Trajectory, "one stochastic trajectory of trajectory_steps steps"},
  };
  std::vector<std::pair<CLI::App*, Experiment>> subs;
  for (const auto& [e, text] : help) {
    CLI::App* sub = app.add_subcommand(experiment_name(e), text);
    if (e == Experiment::Trajectory) sub->alias("single-trajectory");
    sub->add_option("--params", params_path, "parameter file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "override, key=value (repeatable)");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--lanes", lanes, "worker threads (default: NANOLASER_LANES or all cores)");
    subs.emplace_back(sub, e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  Experiment exp = Experiment::Bifurcation;
  for (const auto& [sub, e] : subs) {
    if (sub->parsed()) exp = e;
  }
  auto report = [](const char* kind, const std::exception& e) {
    const nlohmann::json err = {{"error", kind}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
  };
  try {
    const RunConfig cfg = parse_config(exp, params_path, sets, seed, out_dir, lanes);
    const RunOutcome out = run(cfg);
    std::cout << out.summary.dump(2) << '\n';
    return 0;
  } catch (const ConfigError& e) {
    report("config", e);
    return 2;
  } catch (const InvalidParams& e) {
    report("invalid_params", e);
    return 2;
  } catch (const EnsembleError& e) {
    report("ensemble", e);
    return 3;
  } catch (const std::exception& e) {
    report("runtime", e);
    return 1;
  }
}

}  // namespace nanolaser::cli
