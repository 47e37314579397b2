#include "nanolaser/params.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "nanolaser/errors.hpp"

namespace nanolaser {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidParams(std::string(name) + " must be finite and > 0, got " + std::to_string(v));
  }
}

}  // namespace

void PhysicalParams::validate() const {
  require_positive(kappa, "kappa");
  require_positive(K, "K");
  require_positive(gamma_c, "gamma_c");
  require_positive(gamma_par, "gamma_par");
  require_positive(gamma_tot, "gamma_tot");
  require_positive(beta, "beta");
  if (beta > 1.0) throw InvalidParams("beta must be <= 1");
  require_positive(n0, "n0");
  require_positive(F_P, "F_P");
  require_positive(B_rec, "B_rec");
  require_positive(V_a, "V_a");
  if (!std::isfinite(alpha)) throw InvalidParams("alpha must be finite");
  const double isat = saturation_photons();
  if (!std::isfinite(isat) || isat <= 0.0) throw InvalidParams("saturation photon number not finite");
}

PhysicalParams mesoscopic_params() { return PhysicalParams{}; }

PhysicalParams macroscopic_params() { return coscale_beta(PhysicalParams{}, 1.7e-5); }

PhysicalParams coscale_beta(const PhysicalParams& p, double beta) {
  PhysicalParams q = p;
  const double density = p.transparency_density();
  q.beta = beta;
  q.V_a = p.V_a * p.beta / beta;
  q.n0 = density * q.V_a;
  return q;
}

std::uint64_t params_hash(const PhysicalParams& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (double v : {p.kappa, p.alpha, p.K, p.gamma_c, p.gamma_par, p.gamma_tot, p.beta, p.n0,
                   p.F_P, p.B_rec, p.V_a}) {
    mix(v);
  }
  return h;
}

PumpSchedule PumpSchedule::constant(double P, double duration) {
  PumpSchedule s{PumpKind::Constant, P, P, duration};
  s.validate();
  return s;
}

PumpSchedule PumpSchedule::ramp(double P_start, double P_end, double duration) {
  PumpSchedule s{PumpKind::LinearRamp, P_start, P_end, duration};
  s.validate();
  return s;
}

void PumpSchedule::validate() const {
  if (!(P_start >= 0.0) || !(P_end >= 0.0)) throw InvalidParams("pump must be >= 0");
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw InvalidParams("pump duration must be >= 0");
  if (kind == PumpKind::Constant && P_start != P_end) {
    throw InvalidParams("constant pump schedule needs P_start == P_end");
  }
}

}  // namespace nanolaser
