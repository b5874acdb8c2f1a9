// SPDX-License-Identifier: Apache-2.0

#include "fadingcap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fadingcap/quadrature.hpp"
#include "fadingcap/specfun.hpp"

namespace fadingcap {

namespace {

constexpr double kCapacityTol = 1e-11;
constexpr double kPowerTol = 1e-12;  // relative to the budget 1/W
constexpr int kKktCheckPoints = 1024;

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

/// Water level view of sigma*: g(f) = rho sigma*(f), nonincreasing.
struct Level {
  const SpectralVariance& sigma;
  double rho;

  double operator()(double f) const { return rho * sigma.rearranged(f); }

  /// theta(nu): 1 when g(1) > nu, otherwise the boundary of {g > nu}.
  double boundary(double nu) const {
    if ((*this)(1.0) > nu) return 1.0;
    double lo = 0, hi = 1;
    if (!((*this)(lo) > nu)) return 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
      const double mid = 0.5 * (lo + hi);
      if ((*this)(mid) > nu)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

  /// rho sigma* p_o*(f) on the active set.
  double snr_gain(double nu, double f) const {
    const double g = (*this)(f);
    return g > nu ? psi_inverse(nu / g) : 0.0;
  }

  double power(double nu, double theta, double tol) const {
    if (theta <= 0) return 0;
    const auto kinks = sigma.rearranged_kinks();
    return integrate<double>(
        [&](double f) {
          const double g = (*this)(f);
          return g > nu ? psi_inverse(nu / g) / g : 0.0;
        },
        0.0, theta, tol, kinks);
  }
};

}  // namespace

void SnrScenario::validate() const {
  if (!(rho >= 0) || !std::isfinite(rho)) throw DomainError("SnrScenario: rho must be nonnegative and finite");
  if (!(bandwidth > 0) || !std::isfinite(bandwidth)) throw DomainError("SnrScenario: W must be positive");
}

const char* to_string(CapacityMethod method) {
  switch (method) {
    case CapacityMethod::NoCsi: return "no-csi";
    case CapacityMethod::PartialCsi: return "partial-csi";
    case CapacityMethod::HighSnrApprox: return "high-snr";
    case CapacityMethod::MonteCarlo: return "monte-carlo";
  }
  return "?";
}

PowerAllocation PowerAllocation::uniform(double bandwidth) {
  if (!(bandwidth > 0)) throw DomainError("PowerAllocation: W must be positive");
  return PowerAllocation([w = bandwidth](double) { return 1 / w; }, {});
}

PowerAllocation PowerAllocation::from_function(Density density, std::vector<double> kinks) {
  std::sort(kinks.begin(), kinks.end());
  return PowerAllocation(std::move(density), std::move(kinks));
}

PowerAllocation PowerAllocation::from_cells(Eigen::VectorXd cell_values) {
  const Eigen::Index n = cell_values.size();
  if (n < 1) throw UsageError("PowerAllocation: no cells");
  if ((cell_values.array() < 0).any() || !cell_values.allFinite())
    throw DomainError("PowerAllocation: cell values must be finite and nonnegative");
  std::vector<double> edges;
  for (Eigen::Index i = 1; i < n; ++i) edges.push_back(double(i) / double(n));
  return PowerAllocation(
      [v = std::move(cell_values)](double f) {
        const auto n = v.size();
        return v[std::clamp<Eigen::Index>(Eigen::Index(f * double(n)), 0, n - 1)];
      },
      std::move(edges));
}

double PowerAllocation::total() const { return integrate<double>(density_, 0.0, 1.0, 1e-13, kinks_); }

double WaterfillingSolution::allocation_rearranged(double f) const {
  if (degenerate) return 1 / scenario.bandwidth;
  const Level level{sigma, scenario.rho};
  const double g = level(f);
  return g > nu ? psi_inverse(nu / g) / g : 0.0;
}

double WaterfillingSolution::allocation(double f) const { return allocation_rearranged(sigma.recovery_map(f)); }

PowerAllocation WaterfillingSolution::rearranged_allocation() const {
  auto kinks = sigma.rearranged_kinks();
  if (theta > 0 && theta < 1) kinks.push_back(theta);
  return PowerAllocation::from_function([s = *this](double f) { return s.allocation_rearranged(f); }, std::move(kinks));
}

PowerAllocation WaterfillingSolution::original_allocation() const {
  std::vector<double> kinks = sigma.kinks();
  switch (sigma.kind()) {
    case VarianceKind::OrnsteinUhlenbeck:
      kinks.push_back(0.5);
      if (theta > 0 && theta < 1) {
        kinks.push_back(0.5 - theta / 2);
        kinks.push_back(0.5 + theta / 2);
      }
      break;
    case VarianceKind::GridBacked: {
      const auto n = Eigen::Index(kinks.size());
      for (Eigen::Index i = 1; i < n; ++i) kinks.push_back(double(i) / double(n));
      break;
    }
    case VarianceKind::UncorrelatedScattering: break;
  }
  return PowerAllocation::from_function([s = *this](double f) { return s.allocation(f); }, merged(kinks, {}));
}

CapacityResult capacity_with_allocation(const SpectralVariance& sigma, const PowerAllocation& p,
                                        const SnrScenario& scenario) {
  scenario.validate();
  CapacityResult result{0, scenario, CapacityMethod::PartialCsi};
  if (scenario.rho == 0) return result;
  const auto kinks = merged(sigma.kinks(), p.kinks());
  result.value = scenario.bandwidth * integrate<double>(
                                          [&](double f) {
                                            const double alpha = scenario.rho * sigma(f) * p(f);
                                            if (!std::isfinite(alpha)) throw NumericalError("capacity: non-finite integrand");
                                            return expected_log1p_exp(alpha);
                                          },
                                          0.0, 1.0, kCapacityTol / scenario.bandwidth, kinks);
  return result;
}

CapacityResult capacity_no_csi(const SpectralVariance& sigma, const SnrScenario& scenario) {
  auto result = capacity_with_allocation(sigma, PowerAllocation::uniform(scenario.bandwidth), scenario);
  result.method = CapacityMethod::NoCsi;
  return result;
}

CapacityResult capacity_high_snr_approx(const SpectralVariance& sigma, const SnrScenario& scenario) {
  scenario.validate();
  if (!(sigma.floor() > 0)) throw DomainError("capacity_high_snr_approx: sigma must be positive on (0, 1)");
  if (!(scenario.rho > 0)) throw DomainError("capacity_high_snr_approx: rho must be positive");
  const double w = scenario.bandwidth;
  const double value =
      w * integrate<double>([&](double f) { return std::log(scenario.rho / w * sigma(f)) - detail::euler_gamma<double>; },
                            0.0, 1.0, kCapacityTol / w, sigma.kinks());
  return {value, scenario, CapacityMethod::HighSnrApprox};
}

double high_snr_gap(const SpectralVariance& sigma1, const SpectralVariance& sigma2, double bandwidth) {
  if (!(bandwidth > 0)) throw DomainError("high_snr_gap: W must be positive");
  if (sigma1.bandwidth() != bandwidth || sigma2.bandwidth() != bandwidth)
    throw UsageError("high_snr_gap: spectral variances belong to a different bandwidth");
  if (!(sigma1.floor() > 0) || !(sigma2.floor() > 0))
    throw DomainError("high_snr_gap: spectral variances must be positive on (0, 1)");
  const auto kinks = merged(sigma1.kinks(), sigma2.kinks());
  return bandwidth * integrate<double>([&](double f) { return std::log(sigma1(f) / sigma2(f)); }, 0.0, 1.0,
                                       kCapacityTol / bandwidth, kinks);
}

WaterfillingSolution waterfill(const SpectralVariance& sigma, const SnrScenario& scenario) {
  scenario.validate();
  WaterfillingSolution sol{sigma, scenario};
  const double w = scenario.bandwidth;
  if (!(sigma.peak() > 0)) throw DomainError("waterfill: sigma is identically zero");
  if (scenario.rho == 0) {
    sol.degenerate = true;
    return sol;
  }

  const Level level{sigma, scenario.rho};
  const double target = 1 / w;
  auto excess = [&](double nu) { return level.power(nu, level.boundary(nu), kPowerTol * target) - target; };

  // Nothing is active at nu >= rho sigma*(0+); lower the level until the budget is exhausted.
  double hi = level(0.0);
  double lo = 0.5 * hi;
  double f_hi = -target;
  double f_lo = excess(lo);
  for (int k = 0; f_lo < 0; ++k) {
    if (k > 2000 || !(lo > 0)) throw NumericalError("waterfill: failed to bracket the water level nu");
    hi = lo;
    f_hi = f_lo;
    lo *= 0.5;
    f_lo = excess(lo);
  }

  // Illinois regula falsi on the decreasing excess power.
  double nu = lo;
  int side = 0;
  for (int iter = 0; iter < 300; ++iter) {
    nu = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(nu > lo && nu < hi)) nu = 0.5 * (lo + hi);
    const double f = excess(nu);
    if (f == 0 || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi) break;
    if (f > 0) {
      lo = nu;
      f_lo = f;
      if (side == 1) f_hi *= 0.5;
      side = 1;
    } else {
      hi = nu;
      f_hi = f;
      if (side == -1) f_lo *= 0.5;
      side = -1;
    }
    if (std::abs(f) <= 1e-15 * target) break;
  }

  sol.nu = nu;
  sol.theta = level.boundary(nu);
  sol.power_residual = std::abs(level.power(nu, sol.theta, kPowerTol * target / 10) - target);

  double kkt = 0;
  for (int i = 0; i < kKktCheckPoints; ++i) {
    const double f = (i + 0.5) / kKktCheckPoints;
    const double g = level(f);
    if (g > nu) {
      const double x = psi_inverse(nu / g);
      kkt = std::max(kkt, std::abs(g * psi(x) - nu));
    } else {
      kkt = std::max(kkt, g - nu);
    }
  }
  sol.kkt_residual = kkt;

  std::vector<double> kinks = sigma.rearranged_kinks();
  sol.capacity = w * integrate<double>([&](double f) { return expected_log1p_exp(level.snr_gain(nu, f)); }, 0.0,
                                       sol.theta, kCapacityTol / w, kinks);
  return sol;
}

CapacityResult capacity_partial_csi(const SpectralVariance& sigma, const SnrScenario& scenario) {
  const auto sol = waterfill(sigma, scenario);
  return {sol.capacity, scenario, CapacityMethod::PartialCsi};
}

double active_volume(const SpectralVariance& sigma, const SnrScenario& scenario) {
  return waterfill(sigma, scenario).theta;
}

}  // namespace fadingcap
