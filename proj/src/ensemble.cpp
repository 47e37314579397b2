#include "nanolaser/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <string>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "nanolaser/errors.hpp"
#include "nanolaser/parallel.hpp"
#include "nanolaser/stability.hpp"

namespace nanolaser {

std::size_t default_lanes() {
  if (const char* env = std::getenv("NANOLASER_LANES")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void EnsembleConfig::validate() const {
  if (n_traj == 0) throw InvalidParams("n_traj must be >= 1");
  if (!(init.dt > 0.0)) throw InvalidParams("init.dt must be > 0");
  if (!(init.relax_ns >= 0.0)) throw InvalidParams("relax_ns must be >= 0");
}

CavityState phase_aligned_state(double x, double I_tot, double n) {
  if (!(std::abs(x) <= 1.0)) throw OutOfRange("phase_aligned_state: |x| > 1");
  if (!(I_tot >= 0.0)) throw InvalidParams("phase_aligned_state: I_tot < 0");
  const double theta = std::asin(std::abs(x));
  const double r = std::sqrt(I_tot);
  const double sign = x >= 0.0 ? 1.0 : -1.0;  // Phi = 0 or pi
  return {cplx{r * std::cos(0.5 * theta), 0.0}, cplx{sign * r * std::sin(0.5 * theta), 0.0}, n, n, 0.0};
}

namespace {

double bloch_y(const CavityState& s) { return 2.0 * std::imag(s.a1 * std::conj(s.a2)) / s.total_intensity(); }
double bloch_z(const CavityState& s) { return (std::norm(s.a1) - std::norm(s.a2)) / s.total_intensity(); }

CavityState relaxed_state(const PhysicalParams& p, double P, const InitOptions& opts) {
  CavityState s;
  const auto B = phase_locked_state(Supermode::Bonding, P, p);
  const auto A = phase_locked_state(Supermode::Antibonding, P, p);
  if (B && supermode_stability(Supermode::Bonding, P, p).stable()) {
    s = B->state;
  } else if (A && supermode_stability(Supermode::Antibonding, P, p).stable()) {
    s = A->state;
  } else if (B) {
    s = phase_aligned_state(0.0, 2.0 * B->state.I1(), B->state.n1);
  } else {
    // Below threshold: the noiseless fields decay; keep a seed of one photon.
    const double n = P / p.gamma_tot;
    s = phase_aligned_state(0.0, 1.0, n);
  }
  s.t = 0.0;
  s = relax(s, P, p, opts.relax_ns, opts.dt);
  s.t = 0.0;
  return s;
}

// Advances noiselessly to the next y = 0 crossing with z > 0 and locates it
// by bisection of the final fractional step.
std::optional<CavityState> advance_to_alignment(CavityState s, double P, const PhysicalParams& p, double dt) {
  const std::size_t max_steps = step_count(2.0, dt);
  for (std::size_t k = 0; k < max_steps; ++k) {
    const CavityState next = noiseless_step(s, P, p, Scheme::SplitExponential, dt);
    const double y0 = bloch_y(s);
    const double y1 = bloch_y(next);
    if (y0 == 0.0 && bloch_z(s) > 0.0) return s;
    if ((y0 < 0.0) != (y1 < 0.0) && bloch_z(next) + bloch_z(s) > 0.0) {
      double lo = 0.0, hi = dt;
      CavityState best = next;
      for (int it = 0; it < 80 && hi - lo > 1e-18; ++it) {
        const double h = 0.5 * (lo + hi);
        const CavityState mid = noiseless_step(s, P, p, Scheme::SplitExponential, h);
        const double ym = bloch_y(mid);
        best = mid;
        if ((ym < 0.0) == (y0 < 0.0)) {
          lo = h;
        } else {
          hi = h;
        }
      }
      return best;
    }
    s = next;
  }
  return std::nullopt;
}

// Removes the residual relative phase left by the bisection (|dPhi| ~ 1e-13)
// so that Phi is exactly 0 or pi.
CavityState snap_phase(CavityState s) {
  const double m1 = std::abs(s.a1), m2 = std::abs(s.a2);
  const double phi = wrap_phase(std::arg(s.a1) - std::arg(s.a2));
  const double sign = std::abs(phi) < 0.5 * std::numbers::pi ? 1.0 : -1.0;
  const cplx u = m1 > 0.0 ? s.a1 / m1 : cplx{1.0, 0.0};
  s.a1 = m1 * u;
  s.a2 = sign * m2 * u;
  return s;
}

}  // namespace

CavityState initial_condition(InitPolicy policy, const PhysicalParams& p, double P, const InitOptions& opts) {
  p.validate();
  switch (policy) {
    case InitPolicy::FixedState:
      return opts.fixed_state;
    case InitPolicy::RelaxedSteadyState:
      return relaxed_state(p, P, opts);
    case InitPolicy::PhaseAligned: {
      const CavityState r = relaxed_state(p, P, opts);
      const double I_tot = r.total_intensity();
      if (!(I_tot > 0.0) || std::isinf(I_tot)) {
        throw DegenerateInput("initial_condition: no lasing attractor at P = " + std::to_string(P));
      }
      CavityState s;
      if (auto aligned = advance_to_alignment(r, P, p, opts.dt)) {
        s = snap_phase(*aligned);
      } else {
        const double n = 0.5 * (r.n1 + r.n2);
        s = phase_aligned_state(modal_frame(r).x, I_tot, n);
      }
      s.t = 0.0;
      return s;
    }
  }
  throw InvalidParams("initial_condition: unknown policy");
}

std::vector<double> EnsembleResult::mean_I1() const {
  std::vector<double> m(I1.size());
  for (std::size_t i = 0; i < I1.size(); ++i) m[i] = I1[i].mean;
  return m;
}

namespace {

struct BlockResult {
  std::vector<MomentAccumulator> modal;
  std::vector<ScalarMoments> I1, I2;
  std::vector<TrajectoryRecord> trajectories;
  std::vector<TrajectoryFailure> failures;
  std::size_t clamp_count = 0;
};

}  // namespace

EnsembleResult run_ensemble(const EnsembleConfig& cfg, const PumpSchedule& schedule, const PhysicalParams& p,
                            const IntegratorConfig& icfg) {
  cfg.validate();
  p.validate();
  schedule.validate();
  icfg.validate(p);
  if (schedule.duration < icfg.dt) throw InvalidParams("run_ensemble: schedule duration shorter than dt");

  const CavityState start = initial_condition(cfg.init_policy, p, schedule.at(0.0), cfg.init);
  const std::size_t steps = step_count(schedule.duration, icfg.dt);
  const std::size_t stride = icfg.record_stride;
  const std::size_t n_points = steps / stride + 1;

  EnsembleResult out;
  out.n_traj = cfg.n_traj;
  out.master_seed = cfg.master_seed;
  out.modal.resize(n_points);
  out.I1.resize(n_points);
  out.I2.resize(n_points);
  out.times.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    out.times[i] = start.t + static_cast<double>(i * stride) * icfg.dt;
  }

  const bool keep = cfg.reduction == Reduction::FullSamples;
  auto run_block = [&](std::size_t b) {
    BlockResult r;
    r.modal.resize(n_points);
    r.I1.resize(n_points);
    r.I2.resize(n_points);
    const std::size_t first = b * kTrajectoryBlock;
    const std::size_t last = std::min(cfg.n_traj, first + kTrajectoryBlock);
    for (std::size_t k = first; k < last; ++k) {
      NormalStream rng(cfg.master_seed, k);
      TrajectoryRecord rec;
      if (keep) {
        rec.dt = icfg.dt;
        rec.record_stride = stride;
        rec.seed = cfg.master_seed;
        rec.samples.reserve(n_points);
        rec.samples.push_back(start);
      }
      auto sample = [&](const CavityState& s, std::size_t i) {
        r.I1[i].add(s.I1());
        r.I2[i].add(s.I2());
        if (s.total_intensity() > 0.0) r.modal[i].add(modal_frame(s));
      };
      try {
        sample(start, 0);
        StepDiagnostics diag;
        evolve(start, schedule, p, icfg, rng, steps, diag, [&](const CavityState& s, std::size_t k_step) {
          if (k_step % stride == 0) {
            sample(s, k_step / stride);
            if (keep) rec.samples.push_back(s);
          }
        });
        r.clamp_count += diag.clamp_count;
        rec.diagnostics = diag;
      } catch (const IntegrationError& e) {
        r.failures.push_back({k, e.time_ns(), e.what()});
      }
      if (keep) r.trajectories.push_back(std::move(rec));
    }
    return r;
  };

  const std::size_t n_blocks = (cfg.n_traj + kTrajectoryBlock - 1) / kTrajectoryBlock;
  const std::size_t lanes = cfg.lanes ? cfg.lanes : default_lanes();
  std::vector<TrajectoryFailure> failures;
  // Blocks are evaluated in waves of `lanes` and folded in block order, which
  // bounds memory and keeps the reduction independent of the lane count.
  for (std::size_t w0 = 0; w0 < n_blocks; w0 += lanes) {
    const std::size_t wn = std::min(lanes, n_blocks - w0);
    auto wave = parallel_map<BlockResult>(wn, lanes, [&](std::size_t i) { return run_block(w0 + i); });
    for (auto& r : wave) {
      for (std::size_t i = 0; i < n_points; ++i) {
        out.modal[i].merge(r.modal[i]);
        out.I1[i].merge(r.I1[i]);
        out.I2[i].merge(r.I2[i]);
      }
      out.clamp_count += r.clamp_count;
      for (auto& f : r.failures) failures.push_back(std::move(f));
      for (auto& t : r.trajectories) out.trajectories.push_back(std::move(t));
    }
  }
  if (!failures.empty()) throw EnsembleError(std::move(failures));
  return out;
}

// ---------------------------------------------------------------------------

EnvelopeFit fit_envelope(std::span<const double> trace, double dt, double K) {
  if (!(dt > 0.0) || !(K > 0.0)) throw InvalidParams("fit_envelope: dt and K must be > 0");
  const double omega = 2.0 * K;  // beat angular frequency
  const double period = 2.0 * std::numbers::pi / omega;
  const double duration = static_cast<double>(trace.size()) * dt;
  if (duration < 20.0 * period) {
    throw InsufficientData("fit_envelope: trace spans fewer than 20 beat periods");
  }
  const std::size_t W = std::max<std::size_t>(4, static_cast<std::size_t>(std::llround(10.0 * period / dt)));

  EnvelopeFit fit;
  for (std::size_t j0 = 0; j0 + W <= trace.size(); j0 += W) {
    double mean = 0.0;
    for (std::size_t k = j0; k < j0 + W; ++k) mean += trace[k];
    mean /= static_cast<double>(W);
    cplx z{};
    for (std::size_t k = j0; k < j0 + W; ++k) {
      const double t = static_cast<double>(k) * dt;
      z += (trace[k] - mean) * std::polar(1.0, -omega * t);
    }
    fit.times.push_back((static_cast<double>(j0) + 0.5 * static_cast<double>(W - 1)) * dt);
    fit.envelope.push_back(2.0 * std::abs(z) / static_cast<double>(W));
  }
  const auto& t = fit.times;
  const auto& E = fit.envelope;
  const std::size_t n = E.size();

  // For fixed lambda the optimal E0 is closed-form; minimise over lambda.
  auto amplitude = [&](double lam) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::exp(-lam * t[i]);
      num += E[i] * w;
      den += w * w;
    }
    return den > 0.0 ? num / den : 0.0;
  };
  auto sse = [&](double lam) {
    const double E0 = amplitude(lam);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = E[i] - E0 * std::exp(-lam * t[i]);
      s += r * r;
    }
    return s;
  };
  const double span = t.back() - t.front();
  const double lam_lo = -2.0 / span;
  const double lam_hi = 20.0 / (static_cast<double>(W) * dt);
  // Coarse log-spaced grid brackets the minimum, Brent refines it.
  constexpr int kGrid = 400;
  std::vector<double> grid;
  grid.reserve(kGrid + 1);
  for (int i = 0; i <= kGrid / 4; ++i) grid.push_back(lam_lo * (1.0 - static_cast<double>(i) / (kGrid / 4)));
  const double lmin = 1e-4 / span;
  for (int i = 0; i <= kGrid; ++i) grid.push_back(lmin * std::pow(lam_hi / lmin, static_cast<double>(i) / kGrid));
  std::size_t best = 0;
  double best_sse = sse(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = sse(grid[i]);
    if (v < best_sse) {
      best_sse = v;
      best = i;
    }
  }
  const double a = grid[best == 0 ? 0 : best - 1];
  const double b = grid[std::min(best + 1, grid.size() - 1)];
  const auto [lam, s_min] = boost::math::tools::brent_find_minima(sse, a, b, 50);

  fit.decay_rate = lam;
  fit.initial_amplitude = amplitude(lam);
  fit.residual_rms = std::sqrt(s_min / static_cast<double>(n));
  if (!(fit.initial_amplitude > 0.0) || fit.residual_rms > 0.3 * fit.initial_amplitude) {
    throw FitError("fit_envelope: envelope is not exponential (residual " + std::to_string(fit.residual_rms) +
                   ", E0 " + std::to_string(fit.initial_amplitude) + ")");
  }
  // Total change over the trace indistinguishable from the residual scatter.
  const double change = std::abs(fit.initial_amplitude * -std::expm1(-lam * span));
  if (change < 2.0 * fit.residual_rms) {
    fit.below_noise_floor = true;
    fit.decay_rate = 0.0;
  }
  return fit;
}

// ---------------------------------------------------------------------------

std::vector<double> StationarySamples::x_values() const {
  std::vector<double> x;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.I_B.size(); ++i) x.push_back((s.I_B[i] - s.I_A[i]) / (s.I_B[i] + s.I_A[i]));
  }
  return x;
}

std::vector<double> StationarySamples::Itot_values() const {
  std::vector<double> I;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.I_B.size(); ++i) I.push_back(s.I_B[i] + s.I_A[i]);
  }
  return I;
}

std::vector<double> StationarySamples::thinned_x(double thin_ns) const {
  std::vector<double> x;
  for (const auto& s : series) {
    if (!(s.spacing_ns > 0.0)) continue;
    const std::size_t every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(thin_ns / s.spacing_ns)));
    for (std::size_t i = 0; i < s.I_B.size(); i += every) {
      x.push_back((s.I_B[i] - s.I_A[i]) / (s.I_B[i] + s.I_A[i]));
    }
  }
  return x;
}

namespace {

struct StationaryBlock {
  MomentAccumulator moments;
  std::vector<ModalSeries> series;
  std::vector<TrajectoryFailure> failures;
  std::size_t clamp_count = 0;
};

}  // namespace

StationarySamples sample_stationary(const EnsembleConfig& cfg, double P, const PhysicalParams& p,
                                    const IntegratorConfig& icfg, const StationaryWindow& win) {
  cfg.validate();
  p.validate();
  icfg.validate(p);
  if (!(win.burn_ns >= 0.0) || !(win.window_ns > 0.0) || win.sample_stride < 1 || !(win.retain_ns >= 0.0)) {
    throw InvalidParams("sample_stationary: invalid window");
  }
  const CavityState start = cfg.init_policy == InitPolicy::FixedState
                                ? cfg.init.fixed_state
                                : initial_condition(InitPolicy::RelaxedSteadyState, p, P, cfg.init);
  const PumpSchedule pump = PumpSchedule::constant(P, win.burn_ns + win.window_ns);
  const std::size_t burn = step_count(win.burn_ns, icfg.dt);
  const std::size_t steps = step_count(win.window_ns, icfg.dt);
  const std::size_t retain =
      win.retain_ns > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(win.retain_ns / icfg.dt)))
                          : 0;

  auto run_block = [&](std::size_t b) {
    StationaryBlock r;
    const std::size_t first = b * kTrajectoryBlock;
    const std::size_t last = std::min(cfg.n_traj, first + kTrajectoryBlock);
    for (std::size_t k = first; k < last; ++k) {
      NormalStream rng(cfg.master_seed, k);
      StepDiagnostics diag;
      ModalSeries ser;
      ser.spacing_ns = retain * icfg.dt;
      try {
        CavityState s = evolve(start, pump, p, icfg, rng, burn, diag, [](const CavityState&, std::size_t) {});
        evolve(s, pump, p, icfg, rng, steps, diag, [&](const CavityState& st, std::size_t i) {
          const bool acc = i % win.sample_stride == 0;
          const bool ret = retain && i % retain == 0;
          if (!acc && !ret) return;
          const ModalFrame f = modal_frame(st);
          if (acc) r.moments.add(f);
          if (ret) {
            ser.I_B.push_back(f.I_B);
            ser.I_A.push_back(f.I_A);
          }
        });
      } catch (const IntegrationError& e) {
        r.failures.push_back({k, e.time_ns(), e.what()});
      } catch (const DegenerateInput& e) {
        r.failures.push_back({k, std::nan(""), e.what()});
      }
      r.clamp_count += diag.clamp_count;
      if (retain) r.series.push_back(std::move(ser));
    }
    return r;
  };

  StationarySamples out;
  out.start = start;
  const std::size_t n_blocks = (cfg.n_traj + kTrajectoryBlock - 1) / kTrajectoryBlock;
  const auto blocks = parallel_map<StationaryBlock>(n_blocks, cfg.lanes, run_block);
  std::vector<TrajectoryFailure> failures;
  for (const auto& r : blocks) {
    out.moments.merge(r.moments);
    out.clamp_count += r.clamp_count;
    failures.insert(failures.end(), r.failures.begin(), r.failures.end());
    out.series.insert(out.series.end(), r.series.begin(), r.series.end());
  }
  if (!failures.empty()) throw EnsembleError(std::move(failures));
  return out;
}

}  // namespace nanolaser
