// SPDX-License-Identifier: Apache-2.0

#pragma once

// Monte Carlo oracle: draws the complex Gaussian impulse response H = X + jY on a time grid from
// its covariance kernel, takes the discretized Fourier transform and estimates the spectral
// fading variance and the average rate without any of the closed forms.

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include <cstdint>
#include <span>
#include <vector>

#include "fadingcap/capacity.hpp"
#include "fadingcap/channel.hpp"

namespace fadingcap {

struct ChannelRealization {
  Eigen::VectorXd tau;   // sample times in [0, T]
  Eigen::VectorXcd h;    // X + jY at those times
  double dtau = 0;       // Riemann weight of each sample
};

struct McEstimate {
  double value = 0;
  double std_error = 0;
  std::size_t n_realizations = 0;

  /// (value - reference) / std_error.
  double z_score(double reference) const;
};

/// Dense-covariance sampler for the OU kernel on the midpoint grid tau_i = (i + 1/2) T / M.
///
/// Realization k is generated from its own generator seeded by (seed, k), so any subset of
/// realizations can be regenerated independently and in any order.
class ChannelSampler {
 public:
  ChannelSampler(const OuKernel& kernel, Eigen::Index m = 1024, double horizon = 0, std::uint64_t seed = 0);

  const OuKernel& kernel() const { return kernel_; }
  const Eigen::VectorXd& times() const { return times_; }
  double dtau() const { return dtau_; }
  double horizon() const { return horizon_; }
  Eigen::Index size() const { return times_.size(); }
  std::uint64_t seed() const { return seed_; }
  /// Diagonal jitter added before the factorization succeeded (0 when none was needed).
  double jitter() const { return jitter_; }

  /// E|Hhat(fhat)|^2 of the discretized transform, 2 dtau^2 e^H C e with e_i = exp(-j 2 pi fhat tau_i).
  /// This is what estimate_spectral_variance converges to on this grid.
  double expected_power(double fhat) const;

  ChannelRealization realization(std::uint64_t index) const;
  /// Columns are realizations first, first + 1, ..., first + count - 1.
  Eigen::MatrixXcd batch(std::uint64_t first, Eigen::Index count) const;

 private:
  Eigen::MatrixXd draw_normals(std::uint64_t first, Eigen::Index count, bool imaginary) const;

  OuKernel kernel_;
  Eigen::VectorXd times_;
  double dtau_;
  double horizon_;
  std::uint64_t seed_;
  double jitter_ = 0;
  Eigen::MatrixXd factor_;  // lower triangular, covariance = factor * factor^T
};

std::vector<ChannelRealization> sample_realizations(const OuKernel& kernel, Eigen::Index m, double horizon,
                                                    std::size_t n, std::uint64_t seed);

/// Hhat(fhat_k) = sum_i h(tau_i) exp(-j 2 pi fhat_k tau_i) dtau for each column of h (K x B).
Eigen::MatrixXcd frequency_response(const Eigen::MatrixXcd& h, const Eigen::VectorXd& tau, double dtau,
                                    const Eigen::VectorXd& frequencies);

/// Quadrature nodes on the physical band (-W/2, W/2) that break at the allocation's kinks.
struct BandQuadrature {
  Eigen::VectorXd frequencies;  // physical
  Eigen::VectorXd weights;
  Eigen::VectorXd power;        // phat at each node
};
BandQuadrature band_quadrature(const PowerAllocation& p, double bandwidth, int panels_min = 4, int nodes_per_panel = 16);

McEstimate estimate_spectral_variance(std::span<const ChannelRealization> realizations, double fhat);

McEstimate estimate_capacity(std::span<const ChannelRealization> realizations, const PowerAllocation& p,
                             const SnrScenario& scenario);

struct CapacityQuery {
  PowerAllocation allocation;
  SnrScenario scenario;
};

struct McReport {
  std::vector<McEstimate> spectrum;  // one per requested frequency
  std::vector<McEstimate> capacity;  // one per query
};

/// Streams n realizations in fixed-size batches and evaluates every estimate on the same draws.
/// Batches may run on several threads; partial sums are combined in batch order, so the result
/// does not depend on the number of workers.
McReport run_monte_carlo(const ChannelSampler& sampler, std::size_t n, std::span<const double> spectrum_frequencies,
                         std::span<const CapacityQuery> queries, Eigen::Index batch_size = 256, unsigned workers = 1);

}  // namespace fadingcap
