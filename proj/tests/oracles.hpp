#pragma once

// Independent reference computations shared by the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nanolaser/model.hpp"
#include "nanolaser/params.hpp"
#include "nanolaser/rng.hpp"
#include "nanolaser/sde.hpp"

namespace oracle {

using namespace nanolaser;

/// Supermode photon numbers of the transparency-pumped pair (G = 0), where the
/// fields are a linear Ornstein-Uhlenbeck process with rates
/// Re(lambda_B) = -(kappa - gamma_c) and Re(lambda_A) = -(kappa + gamma_c).
struct LinearNoiseCase {
  PhysicalParams p = mesoscopic_params();
  double P() const { return transparency_pump(p); }
  double R() const { return spontaneous_rate(p.n0, p); }
  double rate_B() const { return p.kappa - p.gamma_c; }
  double rate_A() const { return p.kappa + p.gamma_c; }
  /// <|a|^2> of the continuous process.
  double continuous(double rate) const { return R() / (2.0 * rate); }
  /// <|a|^2> of the map a <- exp(lambda h) a + dW with <|dW|^2> = R h.
  double discrete(double rate, double h) const { return R() * h / -std::expm1(-2.0 * rate * h); }
};

struct PhotonMeans {
  double I_B = 0.0;
  double I_A = 0.0;
};

/// Time-averaged supermode photon numbers from the library integrator.
inline PhotonMeans simulate_linear_noise(const LinearNoiseCase& c, double dt, std::size_t steps, std::uint64_t seed,
                                         Scheme scheme = Scheme::SplitExponential) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.scheme = scheme;
  cfg.allow_large_dt = true;
  NormalStream rng(seed, 0);
  StepDiagnostics diag;
  CavityState s{{}, {}, c.p.n0, c.p.n0, 0.0};
  const double P = c.P();
  for (std::size_t k = 0; k < 20000; ++k) s = step(s, P, c.p, cfg, rng, diag);
  PhotonMeans m;
  for (std::size_t k = 0; k < steps; ++k) {
    s = step(s, P, c.p, cfg, rng, diag);
    const auto [b, a] = to_modal(s.a1, s.a2);
    m.I_B += std::norm(b);
    m.I_A += std::norm(a);
  }
  m.I_B /= static_cast<double>(steps);
  m.I_A /= static_cast<double>(steps);
  return m;
}

/// Ornstein-Uhlenbeck series with correlation time tau (exact update).
inline std::vector<double> ou_series(double tau, double dt, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  const double a = std::exp(-dt / tau), b = std::sqrt(-std::expm1(-2.0 * dt / tau));
  std::vector<double> v(n);
  double x = N(g);
  for (auto& e : v) {
    x = a * x + b * N(g);
    e = x;
  }
  return v;
}

/// Inverse-CDF draws from N exp(-Lambda x) on [-1, 1].
inline std::vector<double> truncated_exponential_samples(double Lambda, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) {
    const double u = U(g);
    if (Lambda == 0.0) {
      x = 2.0 * u - 1.0;
    } else {
      // F(x) = (e^{L} - e^{-L x}) / (e^{L} - e^{-L})
      x = -std::log(std::exp(Lambda) - u * (std::exp(Lambda) - std::exp(-Lambda))) / Lambda;
    }
  }
  return v;
}

/// Independent mode intensities I_B = c(1+x)/2, I_A = c(1-x)/2 with x uniform
/// and c Poisson distributed.
struct SyntheticModes {
  std::vector<double> I_B, I_A, x, I;
};

inline SyntheticModes uniform_imbalance_poisson_intensity(std::size_t n, double mean_I, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::poisson_distribution<long> Pn(mean_I);
  SyntheticModes s;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = U(g);
    const double c = static_cast<double>(Pn(g));
    s.x.push_back(x);
    s.I.push_back(c);
    s.I_B.push_back(0.5 * c * (1.0 + x));
    s.I_A.push_back(0.5 * c * (1.0 - x));
  }
  return s;
}

}  // namespace oracle
