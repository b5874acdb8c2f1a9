// SPDX-License-Identifier: Apache-2.0

#pragma once

// Average capacity of the frequency-selective Rayleigh channel, in nats/s:
//
//   C(sigma, rho, p, W) = W * integral_0^1 E_z[log(1 + rho sigma(f) p(f) z)] df,  z ~ Exp(1),
//
// with equal power p = 1/W when the transmitter has no CSI, and the water-filling solution of
// the statistical-CSI problem when it knows sigma.

#include <Eigen/Core>

#include <functional>
#include <vector>

#include "fadingcap/channel.hpp"

namespace fadingcap {

struct SnrScenario {
  double rho = 0;        // P / (N0 W)
  double bandwidth = 1;  // W

  void validate() const;
};

enum class CapacityMethod { NoCsi, PartialCsi, HighSnrApprox, MonteCarlo };

const char* to_string(CapacityMethod method);

struct CapacityResult {
  double value = 0;
  SnrScenario scenario;
  CapacityMethod method = CapacityMethod::NoCsi;
};

/// Spectral power allocation p on the normalized band (0, 1); feasible when p >= 0 and its
/// integral is 1/W.
class PowerAllocation {
 public:
  using Density = std::function<double(double)>;

  static PowerAllocation uniform(double bandwidth);
  /// kinks: points of (0, 1) where p is not smooth; quadrature panels break there.
  static PowerAllocation from_function(Density density, std::vector<double> kinks = {});
  /// Piecewise constant on n equal cells.
  static PowerAllocation from_cells(Eigen::VectorXd cell_values);

  double operator()(double f) const { return density_(f); }
  const std::vector<double>& kinks() const { return kinks_; }
  /// Integral over (0, 1).
  double total() const;

 private:
  PowerAllocation(Density density, std::vector<double> kinks) : density_(std::move(density)), kinks_(std::move(kinks)) {}

  Density density_;
  std::vector<double> kinks_;
};

/// Optimal allocation for known sigma. The allocation lives on the rearranged domain, where the
/// active set is the prefix (0, theta).
struct WaterfillingSolution {
  SpectralVariance sigma;
  SnrScenario scenario;
  double nu = 0;              // Lagrange multiplier of the power constraint
  double theta = 0;           // volume of active frequencies
  double kkt_residual = 0;    // max stationarity / slackness violation on a check grid
  double power_residual = 0;  // |integral of p_o* - 1/W|
  double capacity = 0;        // nats/s
  bool degenerate = false;    // rho == 0: every feasible allocation is optimal

  /// p_o*(f), nonincreasing on [0, 1].
  double allocation_rearranged(double f) const;
  /// p_o(f) = p_o*(phi(f)) on the original frequency axis.
  double allocation(double f) const;

  PowerAllocation rearranged_allocation() const;
  PowerAllocation original_allocation() const;
};

/// C for an arbitrary allocation (evaluated on the original frequency axis).
CapacityResult capacity_with_allocation(const SpectralVariance& sigma, const PowerAllocation& p,
                                        const SnrScenario& scenario);

/// Equal power allocation, p = 1/W.
CapacityResult capacity_no_csi(const SpectralVariance& sigma, const SnrScenario& scenario);

/// Equal-power capacity with the 1 inside the logarithm dropped; needs sigma > 0.
CapacityResult capacity_high_snr_approx(const SpectralVariance& sigma, const SnrScenario& scenario);

/// W * integral of log(sigma1 / sigma2): the SNR-independent limit of C_no(sigma1) - C_no(sigma2).
double high_snr_gap(const SpectralVariance& sigma1, const SpectralVariance& sigma2, double bandwidth);

WaterfillingSolution waterfill(const SpectralVariance& sigma, const SnrScenario& scenario);

CapacityResult capacity_partial_csi(const SpectralVariance& sigma, const SnrScenario& scenario);

double active_volume(const SpectralVariance& sigma, const SnrScenario& scenario);

}  // namespace fadingcap
