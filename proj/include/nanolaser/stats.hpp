#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nanolaser/model.hpp"

namespace nanolaser {

/// Count, mean and centered second moment of a scalar (Welford update,
/// Chan merge).
struct ScalarMoments {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }
  void merge(const ScalarMoments& o);
  /// Population variance (1/n).
  double variance() const { return count ? m2 / static_cast<double>(count) : 0.0; }
};

/// Zero-delay correlations and imbalance/order-parameter moments.
struct CorrelationSet {
  double g2_BB = 0.0;
  double g2_AA = 0.0;
  double g2_BA = 0.0;
  double g2_II = 0.0;
  double mean_x = 0.0;
  double var_x = 0.0;
  double mean_A = 0.0;
  double var_A = 0.0;
  double mean_IB = 0.0;
  double mean_IA = 0.0;
  double cov_I_x = 0.0;  // <I x> - <I><x>
  std::uint64_t count = 0;
};

/// Running means and co-moments of (I_B, I_A, I_tot, x, A).
class MomentAccumulator {
 public:
  enum Obs { IB = 0, IA = 1, Itot = 2, X = 3, A = 4 };
  static constexpr int kObs = 5;

  void add(double I_B, double I_A, double x, double A);
  void add(const ModalFrame& f) { add(f.I_B, f.I_A, f.x, order_parameter(f.x)); }
  void merge(const MomentAccumulator& other);

  std::uint64_t count() const { return count_; }
  double mean(Obs o) const { return mean_[o]; }
  /// Population covariance.
  double covariance(Obs a, Obs b) const;
  double variance(Obs o) const { return covariance(o, o); }

  /// Throws DegenerateInput if empty or a mean intensity is zero.
  CorrelationSet correlations() const;

 private:
  static constexpr int index(int a, int b) {
    if (a > b) std::swap(a, b);
    return a * kObs - a * (a - 1) / 2 + (b - a);
  }

  std::uint64_t count_ = 0;
  std::array<double, kObs> mean_{};
  std::array<double, kObs*(kObs + 1) / 2> comoment_{};
};

/// <I_i I_j> / (<I_i><I_j>) over paired samples.
double g2_zero(std::span<const double> Ii, std::span<const double> Ij);

struct CrossPrediction {
  double g2_BA = 0.0;
  bool degenerate = false;  // <x>^2 -> 1, single-mode operation
};

/// g2_BA = g2_II (1 - <x^2>) / (1 - <x>^2), valid when I and x are uncorrelated.
CrossPrediction cross_from_imbalance(double g2_II, double mean_x, double mean_x2);

struct AmplitudeEstimate {
  double mean_A = 0.0;
  bool approximate = true;  // neglects amplitude fluctuations; valid near switching
};

/// <A> ≈ sqrt(g2_BA).
AmplitudeEstimate amplitude_from_cross(double g2_BA);

/// Imbalance moments recovered from the three mode correlations and the two
/// mean mode intensities, assuming I and x uncorrelated.
struct ReconstructedMoments {
  double mean_x = 0.0;
  double mean_x2 = 0.0;
  double var_x = 0.0;
  double g2_II = 0.0;
};

ReconstructedMoments moments_from_correlations(double g2_BB, double g2_AA, double g2_BA, double mean_IB,
                                               double mean_IA);

/// Truncated exponential rho(x) = N exp(-Lambda x) on [-1, 1].
struct EquilibriumFit {
  double Lambda = 0.0;
  double normalization = 0.5;  // Lambda / (2 sinh Lambda)
  double stderr_lambda = 0.0;  // from Fisher information
  double ks_statistic = 0.0;   // against the fitted density
  double ks_pvalue = 1.0;
  std::size_t n = 0;

  double density(double x) const;
  double cdf(double x) const;
};

/// <x> under the truncated exponential: 1/Lambda - coth(Lambda).
double truncated_exponential_mean(double Lambda);
double truncated_exponential_cdf(double x, double Lambda);
double truncated_exponential_norm(double Lambda);

/// Maximum-likelihood fit; needs >= 100 samples inside [-1, 1].
EquilibriumFit fit_equilibrium(std::span<const double> x);

struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
};

/// One-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
/// distribution (Stephens' small-sample correction).
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct JointHistogram {
  std::vector<double> x_edges;
  std::vector<double> I_edges;
  std::vector<std::uint64_t> counts;  // row-major, x bin major
  std::uint64_t total = 0;            // samples inside the edges
  std::uint64_t outside = 0;          // samples outside either range

  std::size_t x_bins() const { return x_edges.size() - 1; }
  std::size_t I_bins() const { return I_edges.size() - 1; }
  std::uint64_t at(std::size_t ix, std::size_t iI) const { return counts[ix * I_bins() + iI]; }
  std::vector<std::uint64_t> x_marginal() const;
  std::vector<std::uint64_t> I_marginal() const;
};

/// n uniform bins over [lo, hi].
std::vector<double> uniform_edges(double lo, double hi, std::size_t n);

/// Bin index for v, or -1 outside. The last bin is closed on the right.
long bin_index(std::span<const double> edges, double v);

std::vector<std::uint64_t> histogram_1d(std::span<const double> v, std::span<const double> edges);

JointHistogram joint_histogram(std::span<const double> x, std::span<const double> I_tot,
                               std::vector<double> x_edges, std::vector<double> I_edges);

/// 64 x-bins over [-1, 1] and 64 I_tot bins over [0, 3 <I_tot>].
JointHistogram default_joint_histogram(std::span<const double> x, std::span<const double> I_tot);

/// Full width at half maximum of the normalized autocovariance (ns).
double autocorr_width(std::span<const double> trace, double dt);

/// First-order low-pass with -3 dB point at bandwidth_GHz; state starts at
/// the first sample.
std::vector<double> lowpass(std::span<const double> trace, double dt, double bandwidth_GHz);

/// Streaming form of lowpass for per-trajectory filtering.
class LowpassFilter {
 public:
  LowpassFilter(double dt, double bandwidth_GHz);
  double operator()(double v);

 private:
  double gain_;
  double state_ = 0.0;
  bool primed_ = false;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys);

}  // namespace nanolaser
