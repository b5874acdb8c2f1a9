// SPDX-License-Identifier: Apache-2.0

#pragma once

// Covariance kernels and spectral fading variances.
//
// Frequencies come in two flavours: the physical frequency fhat in (-W/2, W/2) and the normalized
// frequency f in (0, 1) with fhat = W (f - 1/2). sigma(f) = sigmahat(W (f - 1/2)) integrates to
// 1/W over (0, 1) when sigmahat integrates to 1 over the band.

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <vector>

#include "fadingcap/rearrange.hpp"

namespace fadingcap {

/// Exponentially attenuated Ornstein-Uhlenbeck covariance for the real (or imaginary) part:
///   R(t, t') = c exp(-a |t - t'|) b exp(-b (t + t')),  t, t' >= 0, zero otherwise.
class OuKernel {
 public:
  OuKernel(double a, double b, double c);

  /// Kernel with c chosen so that the band integral of sigmahat over (-W/2, W/2) is 1.
  static OuKernel normalized(double a, double b, double bandwidth);
  /// Normalized kernel for a given d = a + b, split evenly between a and b.
  static OuKernel normalized_for_d(double d, double bandwidth);

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double d() const { return a_ + b_; }

  double operator()(double tau, double tau_prime) const;

  /// Mean energy 2 * integral of R(t, t) dt of the complex process. Equals c for this kernel.
  double energy() const { return c_; }

  OuKernel scaled(double kappa) const { return OuKernel(a_, b_, c_ * kappa); }

  /// Dense covariance matrix on a set of sample times.
  Eigen::MatrixXd covariance(const Eigen::VectorXd& times) const;

 private:
  double a_, b_, c_;
};

/// c = pi / (2 atan(pi W / d)).
double normalization_constant(double d, double bandwidth);

/// sigmahat_d(fhat) = 2 c d / (d^2 + (2 pi fhat)^2), fhat in [-W/2, W/2].
double spectral_variance_ou(double d, double bandwidth, double fhat);

/// sigma*_d(f) = pi d / atan(pi W / d) / (d^2 + (pi W f)^2), f in [0, 1].
double rearranged_variance_ou(double d, double bandwidth, double f);

/// Normalized frequency where sigma*_{d1} and sigma*_{d2} cross, 0 < d1 < d2.
double crossing_frequency(double d1, double d2, double bandwidth);

/// xi_s(d) = integral_0^s sigma*_d = atan(pi W s / d) / (W atan(pi W / d)).
double cumulative_rearranged(double d, double bandwidth, double s);

enum class VarianceKind { OrnsteinUhlenbeck, UncorrelatedScattering, GridBacked };

const char* to_string(VarianceKind kind);

/// Spectral fading variance sigma on the normalized band (0, 1), with its bandwidth attached.
///
/// Grid-backed variances hold midpoint samples and interpolate linearly between them (constant
/// beyond the outer midpoints); their rearrangement is the sorted sample vector.
class SpectralVariance {
 public:
  static SpectralVariance ornstein_uhlenbeck(double d, double bandwidth);
  static SpectralVariance uncorrelated(double bandwidth);
  static SpectralVariance grid_backed(double bandwidth, Eigen::VectorXd samples);

  VarianceKind kind() const { return kind_; }
  double bandwidth() const { return bandwidth_; }
  /// Decay parameter d; only meaningful for OrnsteinUhlenbeck.
  double d() const { return d_; }

  /// sigma(f), f in [0, 1].
  double operator()(double f) const;
  /// sigma*(f), f in [0, 1].
  double rearranged(double f) const;
  /// sigma*(0+).
  double peak() const { return rearranged(0.0); }
  /// sigma*(1-).
  double floor() const { return rearranged(1.0); }
  /// phi with sigma(f) = sigma*(phi(f)).
  double recovery_map(double f) const;

  /// Breakpoints of sigma on (0, 1) where it is not smooth.
  std::vector<double> kinks() const;
  std::vector<double> rearranged_kinks() const;

  double integral() const;

  SampledFunction<double> sample(Eigen::Index n = kDefaultGridSize) const;
  /// Averages of sigma over n equal cells; their mean is exactly the integral of sigma.
  SampledFunction<double> cell_averages(Eigen::Index n = kDefaultGridSize) const;
  SampledFunction<double> sample_rearranged(Eigen::Index n = kDefaultGridSize) const;
  /// sigma* sampled on n midpoints, as a grid-backed variance.
  SpectralVariance rearranged_grid(Eigen::Index n = kDefaultGridSize) const;

  /// Copy with sigma multiplied by kappa.
  SpectralVariance scaled(double kappa) const;

 private:
  struct Grid {
    Eigen::VectorXd samples;
    Eigen::VectorXd sorted;
    std::vector<Eigen::Index> permutation;
  };

  SpectralVariance(VarianceKind kind, double bandwidth) : kind_(kind), bandwidth_(bandwidth) {}

  static double interpolate(const Eigen::VectorXd& v, double f);

  VarianceKind kind_;
  double bandwidth_;
  double d_ = 0;
  double scale_ = 1;
  std::shared_ptr<const Grid> grid_;
};

/// Constant spectrum 1/W: the uncorrelated-scattering limit.
SpectralVariance uncorrelated_scattering_variance(double bandwidth);

/// sigmahat(fhat) = 2 * double integral of R(t, t') cos(2 pi fhat (t - t')) over [0, T]^2,
/// by iterated composite Gauss-Legendre panels. horizon <= 0 selects T = 20 / b.
double spectral_variance_integral(const OuKernel& kernel, double fhat, double horizon = 0);

/// Grid-backed sigma from numerical integration of the kernel at n normalized midpoints.
SpectralVariance spectral_variance_numeric(const OuKernel& kernel, double bandwidth, Eigen::Index n,
                                           double horizon = 0);

}  // namespace fadingcap
