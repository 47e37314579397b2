#include "nanolaser/sde.hpp"

#include <cmath>
#include <string>

#include "nanolaser/errors.hpp"

namespace nanolaser {

void IntegratorConfig::validate(const PhysicalParams& p) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParams("dt must be > 0");
  if (record_stride < 1) throw InvalidParams("record_stride must be >= 1");
  if (!allow_large_dt && dt * p.kappa > 0.1) {
    throw InvalidParams("dt * kappa = " + std::to_string(dt * p.kappa) + " exceeds 0.1 (set allow_large_dt)");
  }
}

NoiseIncrement noise_increment(const CavityState& s, double dt, const PhysicalParams& p, const StepNormals& xi) {
  const double s1 = std::sqrt(spontaneous_rate(s.n1, p) * dt * 0.5);
  const double s2 = std::sqrt(spontaneous_rate(s.n2, p) * dt * 0.5);
  return {cplx{s1 * xi[0], s1 * xi[1]}, cplx{s2 * xi[2], s2 * xi[3]}};
}

NoiseIncrement noise_increment(const CavityState& s, double dt, const PhysicalParams& p, NormalStream& rng) {
  StepNormals xi;
  for (double& v : xi) v = rng.next();
  return noise_increment(s, dt, p, xi);
}

namespace {

// Exact solution of dn/dt = P - gamma_tot n - gain(n) I over h at frozen I.
double carrier_flow(double n, double I, double P, const PhysicalParams& p, double h) {
  const double gb = p.gamma_par * p.beta;
  const double rate = p.gamma_tot + gb * I;
  const double n_inf = (P + gb * p.n0 * I) / rate;
  return n + (n_inf - n) * -std::expm1(-rate * h);
}

// (a1, a2) <- exp(L h) (a1, a2) with L = [[d1, c], [c, d2]] at frozen carriers.
// Written so that swapping cavities swaps the outputs bit for bit.
void field_propagate(cplx& a1, cplx& a2, double n1, double n2, const PhysicalParams& p, double h) {
  const double G1 = gain(n1, p);
  const double G2 = gain(n2, p);
  const cplx c{p.gamma_c, p.K};
  const cplx d1 = 0.5 * cplx{G1, p.alpha * G1} - p.kappa;
  const cplx d2 = 0.5 * cplx{G2, p.alpha * G2} - p.kappa;
  const cplx m = (d1 + d2) * 0.5;
  const cplx del1 = (d1 - d2) * 0.5;
  const cplx del2 = (d2 - d1) * 0.5;
  const cplx s = std::sqrt(del1 * del1 + c * c);
  const cplx z = s * h;
  cplx ch, sh;  // cosh(z), sinh(z)/s
  if (std::abs(z) < 1e-3) {
    const cplx z2 = z * z;
    ch = 1.0 + z2 * (0.5 + z2 / 24.0);
    sh = h * (1.0 + z2 * (1.0 / 6.0 + z2 / 120.0));
  } else {
    const cplx ep = std::exp(z);
    const cplx em = 1.0 / ep;
    ch = 0.5 * (ep + em);
    sh = 0.5 * (ep - em) / s;
  }
  const cplx decay = std::exp(m * h);
  const cplx b1 = decay * (ch * a1 + sh * (del1 * a1 + c * a2));
  const cplx b2 = decay * (ch * a2 + sh * (del2 * a2 + c * a1));
  a1 = b1;
  a2 = b2;
}

bool finite(const CavityState& s) {
  return std::isfinite(s.a1.real()) && std::isfinite(s.a1.imag()) && std::isfinite(s.a2.real()) &&
         std::isfinite(s.a2.imag()) && std::isfinite(s.n1) && std::isfinite(s.n2);
}

CavityState deterministic_part(const CavityState& s, double P, const PhysicalParams& p, Scheme scheme, double h,
                               StepDiagnostics& diag) {
  CavityState out = s;
  if (scheme == Scheme::SplitExponential) {
    out.n1 = carrier_flow(s.n1, std::norm(s.a1), P, p, 0.5 * h);
    out.n2 = carrier_flow(s.n2, std::norm(s.a2), P, p, 0.5 * h);
    field_propagate(out.a1, out.a2, out.n1, out.n2, p, h);
  } else {
    const StateDerivative d = drift(s, P, p);
    out.a1 = s.a1 + h * d.da1;
    out.a2 = s.a2 + h * d.da2;
    out.n1 = s.n1 + h * d.dn1;
    out.n2 = s.n2 + h * d.dn2;
    if (out.n1 < 0.0) {
      out.n1 = 0.0;
      ++diag.clamp_count;
    }
    if (out.n2 < 0.0) {
      out.n2 = 0.0;
      ++diag.clamp_count;
    }
  }
  out.t = s.t + h;
  return out;
}

// Second carrier half-step of the split scheme, after the noise kick.
void finish_split(CavityState& s, double P, const PhysicalParams& p, double h, StepDiagnostics& diag) {
  s.n1 = carrier_flow(s.n1, std::norm(s.a1), P, p, 0.5 * h);
  s.n2 = carrier_flow(s.n2, std::norm(s.a2), P, p, 0.5 * h);
  // Exact carrier flow stays non-negative for P >= 0; guard against P < 0 input.
  if (s.n1 < 0.0) {
    s.n1 = 0.0;
    ++diag.clamp_count;
  }
  if (s.n2 < 0.0) {
    s.n2 = 0.0;
    ++diag.clamp_count;
  }
}

}  // namespace

CavityState advance(const CavityState& s, double P, const PhysicalParams& p, const IntegratorConfig& cfg,
                    const StepNormals& xi, StepDiagnostics& diag) {
  CavityState out = deterministic_part(s, P, p, cfg.scheme, cfg.dt, diag);
  if (cfg.noise) {
    const NoiseIncrement dW = noise_increment(s, cfg.dt, p, xi);
    out.a1 += dW.dW1;
    out.a2 += dW.dW2;
  }
  if (cfg.scheme == Scheme::SplitExponential) finish_split(out, P, p, cfg.dt, diag);
  if (!finite(out)) throw IntegrationError("non-finite state", s.t);
  return out;
}

CavityState step(const CavityState& s, double P, const PhysicalParams& p, const IntegratorConfig& cfg,
                 NormalStream& rng, StepDiagnostics& diag) {
  StepNormals xi{};
  if (cfg.noise) {
    for (double& v : xi) v = rng.next();
  }
  return advance(s, P, p, cfg, xi, diag);
}

CavityState noiseless_step(const CavityState& s, double P, const PhysicalParams& p, Scheme scheme, double h) {
  StepDiagnostics diag;
  CavityState out = deterministic_part(s, P, p, scheme, h, diag);
  if (scheme == Scheme::SplitExponential) finish_split(out, P, p, h, diag);
  if (!finite(out)) throw IntegrationError("non-finite state", s.t);
  return out;
}

std::vector<double> TrajectoryRecord::times() const {
  std::vector<double> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.push_back(s.t);
  return t;
}

std::size_t step_count(double duration, double dt) {
  return static_cast<std::size_t>(std::llround(std::floor(duration / dt + 1e-9)));
}

TrajectoryRecord integrate(const CavityState& initial, const PumpSchedule& schedule, const PhysicalParams& p,
                           const IntegratorConfig& cfg, NormalStream& rng) {
  cfg.validate(p);
  if (schedule.duration < cfg.dt) throw InvalidParams("integrate: schedule duration shorter than dt");
  const std::size_t steps = step_count(schedule.duration, cfg.dt);

  TrajectoryRecord rec;
  rec.dt = cfg.dt;
  rec.record_stride = cfg.record_stride;
  rec.seed = cfg.seed;
  rec.samples.reserve(steps / cfg.record_stride + 1);
  rec.samples.push_back(initial);
  evolve(initial, schedule, p, cfg, rng, steps, rec.diagnostics, [&](const CavityState& s, std::size_t k) {
    if (k % cfg.record_stride == 0) rec.samples.push_back(s);
  });
  return rec;
}

CavityState relax(CavityState s, double P, const PhysicalParams& p, double duration, double dt, Scheme scheme) {
  const std::size_t steps = step_count(duration, dt);
  const double t0 = s.t;
  for (std::size_t k = 0; k < steps; ++k) {
    s = noiseless_step(s, P, p, scheme, dt);
    s.t = t0 + static_cast<double>(k + 1) * dt;
  }
  return s;
}

}  // namespace nanolaser
