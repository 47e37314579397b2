#include "nanolaser/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nanolaser/errors.hpp"
#include "nanolaser/parallel.hpp"
#include "nanolaser/stability.hpp"

namespace nanolaser {

const char* attractor_name(Attractor a) {
  switch (a) {
    case Attractor::FixedPointB:
      return "fixed_point_B";
    case Attractor::FixedPointA:
      return "fixed_point_A";
    case Attractor::LimitCycle:
      return "limit_cycle";
    case Attractor::Unresolved:
      break;
  }
  return "unresolved";
}

std::vector<double> SweepResult::controls() const {
  std::vector<double> c;
  c.reserve(points.size());
  for (const auto& pt : points) c.push_back(pt.control);
  return c;
}

void require_monotone(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw InvalidParams(std::string(what) + ": empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw InvalidParams(std::string(what) + ": grid must be strictly increasing");
  }
}

AttractorInfo classify_attractor(double P_over_P0, const PhysicalParams& p, const NoiselessOptions& opts) {
  const double P = P_over_P0 * transparency_pump(p);
  AttractorInfo info;
  info.P_over_P0 = P_over_P0;

  const StabilityReport sB = supermode_stability(Supermode::Bonding, P, p);
  const StabilityReport sA = supermode_stability(Supermode::Antibonding, P, p);
  if (sB.exists) info.lead_B = sB.leading.real();
  if (sA.exists) info.lead_A = sA.leading.real();
  const auto B = phase_locked_state(Supermode::Bonding, P, p);
  if (!B) {
    info.final_state = {{}, {}, P / p.gamma_tot, P / p.gamma_tot, 0.0};
    return info;  // no lasing solution
  }

  CavityState s;
  if (sB.stable()) {
    s = B->state;
  } else if (sA.stable()) {
    s = phase_locked_state(Supermode::Antibonding, P, p)->state;
  } else {
    s = phase_aligned_state(0.0, 2.0 * B->state.I1(), B->state.n1);
  }
  s = relax(s, P, p, opts.relax_ns, opts.dt);

  const std::size_t steps = step_count(opts.measure_ns, opts.dt);
  double x_first = 0.0, x_second = 0.0;
  double z_min = 1.0, z_max = -1.0, z_sum = 0.0;
  std::vector<double> z_trace;
  z_trace.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    s = noiseless_step(s, P, p, Scheme::SplitExponential, opts.dt);
    const BlochVector b = bloch_vector(s);
    (k < steps / 2 ? x_first : x_second) += b.x;
    z_min = std::min(z_min, b.z);
    z_max = std::max(z_max, b.z);
    z_sum += b.z;
    z_trace.push_back(b.z);
  }
  x_first /= static_cast<double>(steps / 2);
  x_second /= static_cast<double>(steps - steps / 2);
  info.x = std::clamp(0.5 * (x_first + x_second), -1.0, 1.0);
  info.amplitude = order_parameter(info.x);
  info.z_peak_to_peak = z_max - z_min;
  info.converged = std::abs(x_second - x_first) <= opts.drift_tol;
  s.t = 0.0;
  info.final_state = s;

  if (sB.stable()) {
    info.kind = Attractor::FixedPointB;
  } else if (sA.stable()) {
    info.kind = Attractor::FixedPointA;
  } else if (info.z_peak_to_peak > opts.oscillation_tol) {
    info.kind = Attractor::LimitCycle;
    // Period from upward crossings of the mean of z.
    const double z_mean = z_sum / static_cast<double>(steps);
    std::vector<double> up;
    for (std::size_t k = 1; k < z_trace.size(); ++k) {
      const double a = z_trace[k - 1] - z_mean, b = z_trace[k] - z_mean;
      if (a < 0.0 && b >= 0.0) up.push_back((static_cast<double>(k - 1) + a / (a - b)) * opts.dt);
    }
    if (up.size() >= 2) info.period_ns = (up.back() - up.front()) / static_cast<double>(up.size() - 1);
  }
  return info;
}

std::optional<double> hopf_point(Supermode mode, double lo, double hi, const PhysicalParams& p) {
  const double P0 = transparency_pump(p);
  auto lead = [&](double r) {
    const StabilityReport s = supermode_stability(mode, r * P0, p);
    return s.exists ? s.leading.real() : kNaN;
  };
  double flo = lead(lo), fhi = lead(hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi) || (flo < 0.0) == (fhi < 0.0)) return std::nullopt;
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = lead(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SweepResult bifurcation_scan(const std::vector<double>& pump_grid, const PhysicalParams& p,
                             const NoiselessOptions& opts) {
  require_monotone(pump_grid, "bifurcation_scan");
  p.validate();
  SweepResult out;
  out.control_name = "P_over_P0";
  out.beta = p.beta;
  auto infos = parallel_map<AttractorInfo>(pump_grid.size(), 0,
                                           [&](std::size_t i) { return classify_attractor(pump_grid[i], p, opts); });
  for (const auto& info : infos) {
    SweepPoint pt;
    pt.control = info.P_over_P0;
    pt.attractor = info.kind;
    pt.noiseless_amplitude = info.amplitude;
    pt.noiseless_period_ns = info.period_ns;
    pt.converged = info.converged;
    pt.below_threshold = !phase_locked_state(Supermode::Bonding, info.P_over_P0 * transparency_pump(p), p);
    pt.corr.mean_x = info.x;
    pt.corr.mean_A = info.amplitude;
    out.points.push_back(pt);
  }
  for (std::size_t i = 1; i < infos.size(); ++i) {
    const bool b0 = infos[i - 1].lead_B < 0.0, b1 = infos[i].lead_B < 0.0;
    if (b0 && !b1) {
      if (auto h = hopf_point(Supermode::Bonding, pump_grid[i - 1], pump_grid[i], p)) out.bifurcations.push_back(*h);
    }
    const bool a0 = infos[i - 1].lead_A < 0.0, a1 = infos[i].lead_A < 0.0;
    if (!a0 && a1) {
      if (auto h = hopf_point(Supermode::Antibonding, pump_grid[i - 1], pump_grid[i], p)) {
        out.bifurcations.push_back(*h);
      }
    }
  }
  std::sort(out.bifurcations.begin(), out.bifurcations.end());
  return out;
}

std::optional<double> zero_crossing(const std::vector<double>& control, const std::vector<double>& y) {
  if (control.size() != y.size()) throw InvalidParams("zero_crossing: length mismatch");
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i - 1] > 0.0 && y[i] <= 0.0) {
      const double f = y[i - 1] / (y[i - 1] - y[i]);
      return control[i - 1] + f * (control[i] - control[i - 1]);
    }
  }
  return std::nullopt;
}

std::vector<SweepResult> stationary_scan(const std::vector<double>& pump_grid, const std::vector<double>& betas,
                                         const PhysicalParams& p, const StationaryOptions& opts) {
  require_monotone(pump_grid, "stationary_scan");
  if (betas.empty()) throw InvalidParams("stationary_scan: empty beta list");
  std::vector<SweepResult> out;
  for (std::size_t bi = 0; bi < betas.size(); ++bi) {
    const PhysicalParams pb = coscale_beta(p, betas[bi]);
    pb.validate();
    SweepResult scan;
    scan.control_name = "P_over_P0";
    scan.beta = pb.beta;
    // The noiseless attractor depends on beta n0 only, which co-scaling keeps fixed,
    // but classifying per beta keeps the scan self-contained.
    auto infos = parallel_map<AttractorInfo>(pump_grid.size(), opts.lanes, [&](std::size_t i) {
      return classify_attractor(pump_grid[i], pb, opts.noiseless);
    });
    for (std::size_t i = 0; i < pump_grid.size(); ++i) {
      const double P = pump_grid[i] * transparency_pump(pb);
      EnsembleConfig ec;
      ec.n_traj = opts.n_traj;
      ec.master_seed = derive_seed(opts.seed, bi, i);
      ec.init_policy = InitPolicy::FixedState;
      ec.init.fixed_state = infos[i].final_state;
      ec.lanes = opts.lanes;
      IntegratorConfig ic;
      ic.dt = opts.dt;
      StationaryWindow win = opts.window;
      if (opts.histograms) {
        win.retain_ns = opts.hist_retain_ns;
      } else if (opts.fit_lambda && win.retain_ns == 0.0) {
        win.retain_ns = opts.thin_ns;
      }
      const StationarySamples smp = sample_stationary(ec, P, pb, ic, win);

      SweepPoint pt;
      pt.control = pump_grid[i];
      pt.corr = smp.moments.correlations();
      pt.attractor = infos[i].kind;
      pt.noiseless_amplitude = infos[i].amplitude;
      pt.noiseless_period_ns = infos[i].period_ns;
      pt.converged = infos[i].converged;
      pt.below_threshold = P < threshold_pump(Supermode::Bonding, pb);
      pt.clamp_count = smp.clamp_count;
      if (opts.fit_lambda) {
        const std::vector<double> xs = smp.thinned_x(opts.thin_ns);
        if (xs.size() >= 100) {
          try {
            pt.lambda_fit = fit_equilibrium(xs);
          } catch (const FitError&) {
          }
        }
      }
      if (opts.histograms) {
        const std::vector<double> xs = smp.x_values(), Is = smp.Itot_values();
        const double mI = pt.corr.mean_IB + pt.corr.mean_IA;
        pt.histogram = joint_histogram(xs, Is, uniform_edges(-1.0, 1.0, opts.hist_x_bins),
                                       uniform_edges(0.0, 3.0 * mI, opts.hist_I_bins));
      }
      scan.points.push_back(std::move(pt));
    }
    std::vector<double> mx;
    for (const auto& pt : scan.points) mx.push_back(pt.corr.mean_x);
    scan.switching_point = zero_crossing(pump_grid, mx);
    out.push_back(std::move(scan));
  }
  return out;
}

double order_parameter_window(const SweepResult& scan) {
  const auto& pts = scan.points;
  if (pts.empty()) return 0.0;
  std::size_t im = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].corr.mean_A > pts[im].corr.mean_A) im = i;
  }
  const double half = 0.5 * pts[im].corr.mean_A;
  auto edge = [&](std::size_t inside, std::size_t outside) {
    const double a = pts[inside].corr.mean_A - half, b = pts[outside].corr.mean_A - half;
    const double f = a / (a - b);
    return pts[inside].control + f * (pts[outside].control - pts[inside].control);
  };
  std::size_t l = im, r = im;
  while (l > 0 && pts[l - 1].corr.mean_A >= half) --l;
  while (r + 1 < pts.size() && pts[r + 1].corr.mean_A >= half) ++r;
  const double left = l > 0 ? edge(l, l - 1) : pts[0].control;
  const double right = r + 1 < pts.size() ? edge(r, r + 1) : pts.back().control;
  return right - left;
}

std::vector<std::size_t> find_dips(const std::vector<double>& v, double rel_prominence) {
  std::vector<std::size_t> dips;
  if (v.size() < 3) return dips;
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double range = *hi_it - *lo_it;
  if (!(range > 0.0)) return dips;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (!(v[i] < v[i - 1] && v[i] <= v[i + 1])) continue;
    // Highest ground on each side before reaching a lower value.
    double left = v[i], right = v[i];
    for (std::size_t j = i; j-- > 0;) {
      if (v[j] < v[i]) break;
      left = std::max(left, v[j]);
    }
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (v[j] < v[i]) break;
      right = std::max(right, v[j]);
    }
    if (std::min(left, right) - v[i] >= rel_prominence * range) dips.push_back(i);
  }
  return dips;
}

// ---------------------------------------------------------------------------

namespace {

struct RampBlock {
  std::vector<MomentAccumulator> full, filtered;
  std::vector<TrajectoryFailure> failures;
};

}  // namespace

RampResult ramp_experiment(const PumpSchedule& ramp, const PhysicalParams& p, const RampOptions& opts) {
  p.validate();
  ramp.validate();
  if (!(opts.bin_ns > 0.0) || opts.sample_stride < 1 || opts.n_traj == 0) {
    throw InvalidParams("ramp_experiment: invalid options");
  }
  IntegratorConfig ic;
  ic.dt = opts.dt;
  ic.validate(p);
  const std::size_t n_bins = static_cast<std::size_t>(std::floor(ramp.duration / opts.bin_ns + 1e-9));
  if (n_bins == 0) throw InvalidParams("ramp_experiment: ramp shorter than one bin");
  const std::size_t steps = step_count(ramp.duration, opts.dt);
  const bool filter = opts.detector_bandwidth_GHz > 0.0;
  const CavityState start = initial_condition(InitPolicy::RelaxedSteadyState, p, ramp.at(0.0), opts.init);

  auto run_block = [&](std::size_t b) {
    RampBlock r;
    r.full.resize(n_bins);
    if (filter) r.filtered.resize(n_bins);
    const std::size_t first = b * kTrajectoryBlock;
    const std::size_t last = std::min(opts.n_traj, first + kTrajectoryBlock);
    for (std::size_t k = first; k < last; ++k) {
      NormalStream rng(opts.seed, k);
      StepDiagnostics diag;
      std::optional<LowpassFilter> fB, fA;
      if (filter) {
        fB.emplace(opts.dt, opts.detector_bandwidth_GHz);
        fA.emplace(opts.dt, opts.detector_bandwidth_GHz);
      }
      try {
        evolve(start, ramp, p, ic, rng, steps, diag, [&](const CavityState& s, std::size_t i) {
          const std::size_t bin = std::min(n_bins - 1, static_cast<std::size_t>(s.t / opts.bin_ns));
          double lB = 0.0, lA = 0.0;
          if (filter) {
            const auto [aB, aA] = to_modal(s.a1, s.a2);
            lB = (*fB)(std::norm(aB));
            lA = (*fA)(std::norm(aA));
          }
          if (i % opts.sample_stride != 0) return;
          r.full[bin].add(modal_frame(s));
          if (filter && lB + lA > 0.0) {
            const double x = std::clamp((lB - lA) / (lB + lA), -1.0, 1.0);
            r.filtered[bin].add(lB, lA, x, order_parameter(x));
          }
        });
      } catch (const IntegrationError& e) {
        r.failures.push_back({k, e.time_ns(), e.what()});
      }
    }
    return r;
  };

  const std::size_t n_blocks = (opts.n_traj + kTrajectoryBlock - 1) / kTrajectoryBlock;
  const auto blocks = parallel_map<RampBlock>(n_blocks, opts.lanes, run_block);
  std::vector<MomentAccumulator> full(n_bins), filtered(filter ? n_bins : 0);
  std::vector<TrajectoryFailure> failures;
  for (const auto& r : blocks) {
    for (std::size_t i = 0; i < n_bins; ++i) {
      full[i].merge(r.full[i]);
      if (filter) filtered[i].merge(r.filtered[i]);
    }
    failures.insert(failures.end(), r.failures.begin(), r.failures.end());
  }
  if (!failures.empty()) throw EnsembleError(std::move(failures));

  RampResult out;
  const double P0 = transparency_pump(p);
  std::vector<double> mx;
  for (std::size_t i = 0; i < n_bins; ++i) {
    const double t = (static_cast<double>(i) + 0.5) * opts.bin_ns;
    out.t_ns.push_back(t);
    out.P_over_P0.push_back(ramp.at(t) / P0);
    const CorrelationSet c = full[i].correlations();
    out.full.push_back(c);
    out.from_g2.push_back(moments_from_correlations(c.g2_BB, c.g2_AA, c.g2_BA, c.mean_IB, c.mean_IA));
    out.amplitude_from_g2.push_back(amplitude_from_cross(std::max(0.0, c.g2_BA)));
    if (filter) out.filtered.push_back(filtered[i].correlations());
    mx.push_back(c.mean_x);
  }
  out.switching_time_ns = zero_crossing(out.t_ns, mx);
  if (out.switching_time_ns) out.switching_point = ramp.at(*out.switching_time_ns) / P0;
  return out;
}

SweepResult beta_sweep(const std::vector<double>& betas, const std::vector<double>& pump_grid, const PhysicalParams& p,
                       const StationaryOptions& opts) {
  if (betas.empty()) throw InvalidParams("beta_sweep: empty beta grid");
  const bool up = betas.size() < 2 || betas[1] > betas[0];
  for (std::size_t i = 1; i < betas.size(); ++i) {
    if (up ? !(betas[i] > betas[i - 1]) : !(betas[i] < betas[i - 1])) {
      throw InvalidParams("beta_sweep: beta grid must be strictly monotone");
    }
  }
  const auto scans = stationary_scan(pump_grid, betas, p, opts);
  SweepResult out;
  out.control_name = "beta";
  for (std::size_t bi = 0; bi < scans.size(); ++bi) {
    const auto& scan = scans[bi];
    SweepPoint pt;
    pt.control = betas[bi];
    std::vector<double> g;
    std::size_t imin = 0;
    double maxA2 = 0.0;
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
      const auto& c = scan.points[i].corr;
      g.push_back(c.g2_BA);
      if (c.g2_BA < g[imin]) imin = i;
      maxA2 = std::max(maxA2, c.mean_A * c.mean_A);
    }
    pt.min_g2_BA = g[imin];
    pt.argmin_P_over_P0 = scan.points[imin].control;
    pt.max_A2 = maxA2;
    pt.dips = find_dips(g).size();
    pt.corr = scan.points[imin].corr;
    out.points.push_back(pt);
  }
  return out;
}

LambdaLinearity lambda_linearity(const SweepResult& scan, double half_width) {
  if (!scan.switching_point) throw FitError("lambda_linearity: scan has no switching point");
  LambdaLinearity out;
  out.P_s = *scan.switching_point;
  for (const auto& pt : scan.points) {
    if (!pt.lambda_fit || std::abs(pt.control - out.P_s) > half_width) continue;
    out.u.push_back(pt.control / out.P_s - 1.0);
    out.Lambda.push_back(pt.lambda_fit->Lambda);
  }
  if (out.u.size() < 3) throw InsufficientData("lambda_linearity: fewer than 3 fitted points in the window");
  out.fit = fit_line(out.u, out.Lambda);
  bool neg = false, pos = false;
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    if (out.u[i] < 0.0 && out.Lambda[i] < 0.0) neg = true;
    if (out.u[i] > 0.0 && out.Lambda[i] > 0.0) pos = true;
  }
  out.sign_change = neg && pos;
  return out;
}

}  // namespace nanolaser
