#include "nanolaser/stats.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "nanolaser/errors.hpp"

namespace nanolaser {

void ScalarMoments::merge(const ScalarMoments& o) {
  if (o.count == 0) return;
  if (count == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(count);
  const double nb = static_cast<double>(o.count);
  const double n = na + nb;
  const double d = o.mean - mean;
  mean += d * nb / n;
  m2 += o.m2 + d * d * na * nb / n;
  count += o.count;
}

// ---------------------------------------------------------------------------
// MomentAccumulator

void MomentAccumulator::add(double I_B, double I_A, double x, double A) {
  const std::array<double, kObs> v{I_B, I_A, I_B + I_A, x, A};
  ++count_;
  const double n = static_cast<double>(count_);
  std::array<double, kObs> d{};
  for (int i = 0; i < kObs; ++i) d[i] = v[i] - mean_[i];
  const double w = (n - 1.0) / n;
  for (int i = 0; i < kObs; ++i) {
    for (int j = i; j < kObs; ++j) comoment_[index(i, j)] += w * d[i] * d[j];
  }
  for (int i = 0; i < kObs; ++i) mean_[i] += d[i] / n;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  std::array<double, kObs> d{};
  for (int i = 0; i < kObs; ++i) d[i] = other.mean_[i] - mean_[i];
  const double w = na * nb / n;
  for (int i = 0; i < kObs; ++i) {
    for (int j = i; j < kObs; ++j) {
      comoment_[index(i, j)] += other.comoment_[index(i, j)] + w * d[i] * d[j];
    }
  }
  for (int i = 0; i < kObs; ++i) mean_[i] += d[i] * nb / n;
  count_ += other.count_;
}

double MomentAccumulator::covariance(Obs a, Obs b) const {
  return count_ ? comoment_[index(a, b)] / static_cast<double>(count_) : 0.0;
}

CorrelationSet MomentAccumulator::correlations() const {
  if (count_ == 0) throw DegenerateInput("correlations: no samples");
  const double mB = mean_[IB], mA = mean_[IA], mI = mean_[Itot];
  if (!(mB > 0.0) || !(mA > 0.0)) throw DegenerateInput("correlations: zero mean mode intensity");
  CorrelationSet c;
  c.g2_BB = 1.0 + covariance(IB, IB) / (mB * mB);
  c.g2_AA = 1.0 + covariance(IA, IA) / (mA * mA);
  c.g2_BA = 1.0 + covariance(IB, IA) / (mB * mA);
  c.g2_II = 1.0 + covariance(Itot, Itot) / (mI * mI);
  c.mean_x = mean_[X];
  c.var_x = covariance(X, X);
  c.mean_A = mean_[A];
  c.var_A = covariance(A, A);
  c.mean_IB = mB;
  c.mean_IA = mA;
  c.cov_I_x = covariance(Itot, X);
  c.count = count_;
  return c;
}

// ---------------------------------------------------------------------------
// Closed-form relations

double g2_zero(std::span<const double> Ii, std::span<const double> Ij) {
  if (Ii.size() != Ij.size()) throw std::invalid_argument("g2_zero: series lengths differ");
  if (Ii.size() < 2) throw InsufficientData("g2_zero: need at least 2 samples");
  const double n = static_cast<double>(Ii.size());
  double si = 0.0, sj = 0.0, sij = 0.0;
  for (std::size_t k = 0; k < Ii.size(); ++k) {
    si += Ii[k];
    sj += Ij[k];
    sij += Ii[k] * Ij[k];
  }
  const double mi = si / n, mj = sj / n;
  if (!(mi > 0.0) || !(mj > 0.0)) throw DegenerateInput("g2_zero: zero mean intensity");
  return (sij / n) / (mi * mj);
}

CrossPrediction cross_from_imbalance(double g2_II, double mean_x, double mean_x2) {
  if (std::abs(mean_x) >= 1.0) throw OutOfRange("cross_from_imbalance: |<x>| = 1, single-mode limit");
  if (mean_x2 > 1.0 + 1e-12 || mean_x2 < mean_x * mean_x - 1e-12) {
    throw OutOfRange("cross_from_imbalance: inconsistent moments");
  }
  const double denom = 1.0 - mean_x * mean_x;
  if (denom < 1e-9) return {0.0, true};
  return {g2_II * (1.0 - mean_x2) / denom, false};
}

AmplitudeEstimate amplitude_from_cross(double g2_BA) {
  if (!(g2_BA >= 0.0)) throw OutOfRange("amplitude_from_cross: g2_BA must be >= 0");
  return {std::sqrt(g2_BA), true};
}

ReconstructedMoments moments_from_correlations(double g2_BB, double g2_AA, double g2_BA, double mean_IB,
                                               double mean_IA) {
  const double mI = mean_IB + mean_IA;
  if (!(mean_IB > 0.0) || !(mean_IA > 0.0)) throw DegenerateInput("moments_from_correlations: zero mean");
  ReconstructedMoments r;
  r.mean_x = (mean_IB - mean_IA) / mI;
  r.g2_II = (g2_BB * mean_IB * mean_IB + g2_AA * mean_IA * mean_IA + 2.0 * g2_BA * mean_IB * mean_IA) / (mI * mI);
  r.mean_x2 = 1.0 - g2_BA * (1.0 - r.mean_x * r.mean_x) / r.g2_II;
  r.var_x = r.mean_x2 - r.mean_x * r.mean_x;
  return r;
}

// ---------------------------------------------------------------------------
// Truncated exponential on [-1, 1]

double truncated_exponential_mean(double L) {
  const double a = std::abs(L);
  if (a < 1e-4) return -L / 3.0 + L * L * L / 45.0;
  return 1.0 / L - 1.0 / std::tanh(L);
}

namespace {

// Var(x) = 1/L^2 - 1/sinh^2 L.
double truncated_exponential_variance(double L) {
  const double a = std::abs(L);
  if (a < 1e-3) return 1.0 / 3.0 - L * L / 15.0;
  if (a > 40.0) return 1.0 / (L * L);
  const double s = std::sinh(a);
  return 1.0 / (a * a) - 1.0 / (s * s);
}

double log_norm(double L) {
  const double a = std::abs(L);
  if (a < 1e-12) return std::log(0.5);
  return std::log(a) - a - std::log(-std::expm1(-2.0 * a));
}

}  // namespace

double truncated_exponential_norm(double L) { return std::exp(log_norm(L)); }

double truncated_exponential_cdf(double x, double L) {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (std::abs(L) < 1e-12) return 0.5 * (x + 1.0);
  if (L < 0.0) return 1.0 - truncated_exponential_cdf(-x, -L);
  return std::expm1(-L * (x + 1.0)) / std::expm1(-2.0 * L);
}

double EquilibriumFit::density(double x) const {
  if (x < -1.0 || x > 1.0) return 0.0;
  return std::exp(log_norm(Lambda) - Lambda * x);
}

double EquilibriumFit::cdf(double x) const { return truncated_exponential_cdf(x, Lambda); }

EquilibriumFit fit_equilibrium(std::span<const double> x) {
  if (x.size() < 100) throw InsufficientData("fit_equilibrium: need at least 100 samples");
  double sum = 0.0;
  for (double v : x) {
    if (!(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12)) {
      throw FitError("fit_equilibrium: sample " + std::to_string(v) + " outside [-1, 1]");
    }
    sum += v;
  }
  const double mean = sum / static_cast<double>(x.size());
  if (std::abs(mean) >= 1.0 - 1e-12) throw FitError("fit_equilibrium: all mass at a boundary");

  // <x>(Lambda) decreases monotonically from +1 to -1.
  double Lambda = 0.0;
  if (std::abs(mean) > 1e-15) {
    const double bound = std::max(10.0, 4.0 / (1.0 - std::abs(mean)));
    auto f = [mean](double L) { return truncated_exponential_mean(L) - mean; };
    boost::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(
        f, -bound, bound, boost::math::tools::eps_tolerance<double>(52), iters);
    Lambda = 0.5 * (root.first + root.second);
  }

  EquilibriumFit fit;
  fit.Lambda = Lambda;
  fit.normalization = truncated_exponential_norm(Lambda);
  fit.n = x.size();
  fit.stderr_lambda = 1.0 / std::sqrt(static_cast<double>(x.size()) * truncated_exponential_variance(Lambda));
  const auto ks = ks_test(x, [Lambda](double v) { return truncated_exponential_cdf(v, Lambda); });
  fit.ks_statistic = ks.statistic;
  fit.ks_pvalue = ks.pvalue;
  return fit;
}

double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  if (lambda < 1.18) {
    // 1 - sqrt(2 pi)/lambda sum exp(-(2k-1)^2 pi^2 / (8 lambda^2))
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double m = 2.0 * k - 1.0;
      s += std::exp(c * m * m);
    }
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InsufficientData("ks_test: no samples");
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double F = cdf(v[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)};
}

// ---------------------------------------------------------------------------
// Histograms

std::vector<double> uniform_edges(double lo, double hi, std::size_t n) {
  if (n == 0 || !(hi > lo)) throw std::invalid_argument("uniform_edges: need n > 0 and hi > lo");
  std::vector<double> e(n + 1);
  for (std::size_t i = 0; i <= n; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
  e[n] = hi;
  return e;
}

long bin_index(std::span<const double> edges, double v) {
  if (!(v >= edges.front() && v <= edges.back())) return -1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  long i = static_cast<long>(it - edges.begin()) - 1;
  const long last = static_cast<long>(edges.size()) - 2;
  return std::min(i, last);
}

namespace {

void check_edges(std::span<const double> e, const char* name) {
  if (e.size() < 2) throw std::invalid_argument(std::string(name) + ": need at least 2 edges");
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (!(e[i] > e[i - 1])) throw std::invalid_argument(std::string(name) + ": edges must be strictly increasing");
  }
}

}  // namespace

std::vector<std::uint64_t> histogram_1d(std::span<const double> v, std::span<const double> edges) {
  check_edges(edges, "histogram_1d");
  std::vector<std::uint64_t> c(edges.size() - 1, 0);
  for (double s : v) {
    const long b = bin_index(edges, s);
    if (b >= 0) ++c[static_cast<std::size_t>(b)];
  }
  return c;
}

JointHistogram joint_histogram(std::span<const double> x, std::span<const double> I_tot,
                               std::vector<double> x_edges, std::vector<double> I_edges) {
  if (x.size() != I_tot.size()) throw std::invalid_argument("joint_histogram: sample vectors differ in length");
  check_edges(x_edges, "joint_histogram x");
  check_edges(I_edges, "joint_histogram I_tot");
  JointHistogram h;
  h.x_edges = std::move(x_edges);
  h.I_edges = std::move(I_edges);
  h.counts.assign(h.x_bins() * h.I_bins(), 0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const long bx = bin_index(h.x_edges, x[k]);
    const long bI = bin_index(h.I_edges, I_tot[k]);
    if (bx < 0 || bI < 0) {
      ++h.outside;
      continue;
    }
    ++h.counts[static_cast<std::size_t>(bx) * h.I_bins() + static_cast<std::size_t>(bI)];
    ++h.total;
  }
  return h;
}

JointHistogram default_joint_histogram(std::span<const double> x, std::span<const double> I_tot) {
  if (I_tot.empty()) throw InsufficientData("default_joint_histogram: no samples");
  const double mean = std::accumulate(I_tot.begin(), I_tot.end(), 0.0) / static_cast<double>(I_tot.size());
  if (!(mean > 0.0)) throw DegenerateInput("default_joint_histogram: zero mean intensity");
  return joint_histogram(x, I_tot, uniform_edges(-1.0, 1.0, 64), uniform_edges(0.0, 3.0 * mean, 64));
}

std::vector<std::uint64_t> JointHistogram::x_marginal() const {
  std::vector<std::uint64_t> m(x_bins(), 0);
  for (std::size_t i = 0; i < x_bins(); ++i) {
    for (std::size_t j = 0; j < I_bins(); ++j) m[i] += at(i, j);
  }
  return m;
}

std::vector<std::uint64_t> JointHistogram::I_marginal() const {
  std::vector<std::uint64_t> m(I_bins(), 0);
  for (std::size_t i = 0; i < x_bins(); ++i) {
    for (std::size_t j = 0; j < I_bins(); ++j) m[j] += at(i, j);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Time-series tools

double autocorr_width(std::span<const double> trace, double dt) {
  const std::size_t n = trace.size();
  if (n < 16) throw InsufficientData("autocorr_width: trace too short");
  const double mean = std::accumulate(trace.begin(), trace.end(), 0.0) / static_cast<double>(n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = trace[i] - mean;
  double c0 = 0.0;
  for (double v : d) c0 += v * v;
  if (!(c0 > 0.0)) throw DegenerateInput("autocorr_width: constant trace");

  double prev = 1.0;
  for (std::size_t k = 1; k < n / 2; ++k) {
    double ck = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) ck += d[i] * d[i + k];
    const double rho = ck / c0;
    if (rho < 0.5) {
      const double half = (static_cast<double>(k) - 1.0 + (prev - 0.5) / (prev - rho)) * dt;
      if (static_cast<double>(n) * dt < 20.0 * half) {
        throw InsufficientData("autocorr_width: trace shorter than 20 half-widths");
      }
      return 2.0 * half;
    }
    prev = rho;
  }
  throw InsufficientData("autocorr_width: autocovariance never drops below one half");
}

LowpassFilter::LowpassFilter(double dt, double bandwidth_GHz)
    : gain_(-std::expm1(-2.0 * std::numbers::pi * bandwidth_GHz * dt)) {
  if (!(bandwidth_GHz > 0.0)) throw std::invalid_argument("lowpass: bandwidth must be > 0");
}

double LowpassFilter::operator()(double v) {
  if (!primed_) {
    state_ = v;
    primed_ = true;
    return state_;
  }
  state_ += gain_ * (v - state_);
  return state_;
}

std::vector<double> lowpass(std::span<const double> trace, double dt, double bandwidth_GHz) {
  LowpassFilter f(dt, bandwidth_GHz);
  std::vector<double> out;
  out.reserve(trace.size());
  for (double v : trace) out.push_back(f(v));
  return out;
}

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw InsufficientData("fit_line: need >= 2 paired points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw DegenerateInput("fit_line: abscissae all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double ssres = syy - f.slope * sxy;
  f.r2 = syy > 0.0 ? 1.0 - ssres / syy : 1.0;
  return f;
}

}  // namespace nanolaser
