// SPDX-License-Identifier: Apache-2.0

#include "fadingcap/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "fadingcap/quadrature.hpp"

namespace fadingcap {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double v, const char* what) {
  if (!(v > 0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

void require_unit(double f, const char* what) {
  if (!(f >= 0 && f <= 1)) throw DomainError(std::string(what) + ": normalized frequency outside [0, 1]");
}

}  // namespace

OuKernel::OuKernel(double a, double b, double c) : a_(a), b_(b), c_(c) {
  if (!(a >= 0) || !std::isfinite(a)) throw DomainError("OuKernel: a must be nonnegative");
  require_positive(b, "OuKernel: b");
  require_positive(c, "OuKernel: c");
}

OuKernel OuKernel::normalized(double a, double b, double bandwidth) {
  return OuKernel(a, b, normalization_constant(a + b, bandwidth));
}

OuKernel OuKernel::normalized_for_d(double d, double bandwidth) {
  require_positive(d, "OuKernel: d");
  return normalized(d / 2, d / 2, bandwidth);
}

double OuKernel::operator()(double tau, double tau_prime) const {
  if (tau < 0 || tau_prime < 0) return 0;
  return c_ * std::exp(-a_ * std::abs(tau - tau_prime)) * b_ * std::exp(-b_ * (tau + tau_prime));
}

Eigen::MatrixXd OuKernel::covariance(const Eigen::VectorXd& times) const {
  const Eigen::Index m = times.size();
  Eigen::MatrixXd k(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = j; i < m; ++i) k(i, j) = k(j, i) = (*this)(times[i], times[j]);
  return k;
}

double normalization_constant(double d, double bandwidth) {
  require_positive(d, "normalization_constant: d");
  require_positive(bandwidth, "normalization_constant: W");
  return kPi / (2 * std::atan(kPi * bandwidth / d));
}

double spectral_variance_ou(double d, double bandwidth, double fhat) {
  const double c = normalization_constant(d, bandwidth);
  if (!(std::abs(fhat) <= bandwidth / 2)) throw DomainError("spectral_variance_ou: frequency outside the band");
  const double w = 2 * kPi * fhat;
  return 2 * c * d / (d * d + w * w);
}

double rearranged_variance_ou(double d, double bandwidth, double f) {
  require_positive(d, "rearranged_variance_ou: d");
  require_positive(bandwidth, "rearranged_variance_ou: W");
  require_unit(f, "rearranged_variance_ou");
  const double x = kPi * bandwidth * f;
  return kPi * d / std::atan(kPi * bandwidth / d) / (d * d + x * x);
}

double crossing_frequency(double d1, double d2, double bandwidth) {
  require_positive(d1, "crossing_frequency: d1");
  require_positive(d2, "crossing_frequency: d2");
  require_positive(bandwidth, "crossing_frequency: W");
  if (!(d1 < d2)) throw UsageError("crossing_frequency: requires d1 < d2");
  const double a1 = std::atan(kPi * bandwidth / d1);
  const double a2 = std::atan(kPi * bandwidth / d2);
  return std::sqrt(d1 * d2 * (d2 * a2 - d1 * a1) / (d2 * a1 - d1 * a2)) / (kPi * bandwidth);
}

double cumulative_rearranged(double d, double bandwidth, double s) {
  require_positive(d, "cumulative_rearranged: d");
  require_positive(bandwidth, "cumulative_rearranged: W");
  require_unit(s, "cumulative_rearranged");
  return std::atan(kPi * bandwidth * s / d) / (bandwidth * std::atan(kPi * bandwidth / d));
}

const char* to_string(VarianceKind kind) {
  switch (kind) {
    case VarianceKind::OrnsteinUhlenbeck: return "ou";
    case VarianceKind::UncorrelatedScattering: return "uncorrelated";
    case VarianceKind::GridBacked: return "grid";
  }
  return "?";
}

SpectralVariance SpectralVariance::ornstein_uhlenbeck(double d, double bandwidth) {
  require_positive(d, "SpectralVariance: d");
  require_positive(bandwidth, "SpectralVariance: W");
  SpectralVariance s(VarianceKind::OrnsteinUhlenbeck, bandwidth);
  s.d_ = d;
  return s;
}

SpectralVariance SpectralVariance::uncorrelated(double bandwidth) {
  require_positive(bandwidth, "SpectralVariance: W");
  return SpectralVariance(VarianceKind::UncorrelatedScattering, bandwidth);
}

SpectralVariance SpectralVariance::grid_backed(double bandwidth, Eigen::VectorXd samples) {
  require_positive(bandwidth, "SpectralVariance: W");
  SampledFunction<double> checked(samples);  // validates size, sign, finiteness
  auto r = decreasing_rearrangement(checked);
  SpectralVariance s(VarianceKind::GridBacked, bandwidth);
  s.grid_ = std::make_shared<const Grid>(Grid{std::move(samples), std::move(r.sorted_values), std::move(r.permutation)});
  return s;
}

double SpectralVariance::interpolate(const Eigen::VectorXd& v, double f) {
  const Eigen::Index n = v.size();
  const double x = f * double(n) - 0.5;
  if (x <= 0) return v[0];
  if (x >= double(n - 1)) return v[n - 1];
  const auto i = Eigen::Index(std::floor(x));
  const double t = x - double(i);
  return (1 - t) * v[i] + t * v[i + 1];
}

double SpectralVariance::operator()(double f) const {
  require_unit(f, "SpectralVariance");
  switch (kind_) {
    case VarianceKind::OrnsteinUhlenbeck: return scale_ * spectral_variance_ou(d_, bandwidth_, bandwidth_ * (f - 0.5));
    case VarianceKind::UncorrelatedScattering: return scale_ / bandwidth_;
    case VarianceKind::GridBacked: return scale_ * interpolate(grid_->samples, f);
  }
  return 0;
}

double SpectralVariance::rearranged(double f) const {
  require_unit(f, "SpectralVariance::rearranged");
  switch (kind_) {
    case VarianceKind::OrnsteinUhlenbeck: return scale_ * rearranged_variance_ou(d_, bandwidth_, f);
    case VarianceKind::UncorrelatedScattering: return scale_ / bandwidth_;
    case VarianceKind::GridBacked: return scale_ * interpolate(grid_->sorted, f);
  }
  return 0;
}

double SpectralVariance::recovery_map(double f) const {
  require_unit(f, "SpectralVariance::recovery_map");
  switch (kind_) {
    case VarianceKind::OrnsteinUhlenbeck: return std::min(1.0, 2 * std::abs(f - 0.5));
    case VarianceKind::UncorrelatedScattering: return f;
    case VarianceKind::GridBacked: {
      const Eigen::Index n = grid_->samples.size();
      const auto i = std::min(n - 1, Eigen::Index(f * double(n)));
      return std::clamp((double(grid_->permutation[std::size_t(i)]) + (f * double(n) - double(i))) / double(n), 0.0, 1.0);
    }
  }
  return f;
}

std::vector<double> SpectralVariance::kinks() const {
  std::vector<double> out;
  if (kind_ == VarianceKind::GridBacked) {
    const Eigen::Index n = grid_->samples.size();
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(SampledFunction<double>::midpoint(i, n));
  }
  return out;
}

std::vector<double> SpectralVariance::rearranged_kinks() const { return kinks(); }

double SpectralVariance::integral() const {
  if (kind_ == VarianceKind::GridBacked) return scale_ * grid_->samples.mean();
  return scale_ / bandwidth_;
}

SampledFunction<double> SpectralVariance::sample(Eigen::Index n) const {
  return SampledFunction<double>::sample([this](double f) { return (*this)(f); }, n);
}

SampledFunction<double> SpectralVariance::cell_averages(Eigen::Index n) const {
  if (n < 2) throw UsageError("SpectralVariance::cell_averages: need at least two cells");
  Eigen::VectorXd v(n);
  const double cells = double(n);
  switch (kind_) {
    case VarianceKind::OrnsteinUhlenbeck: {
      // antiderivative of sigmahat is (c / pi) atan(2 pi fhat / d)
      const double k = scale_ * normalization_constant(d_, bandwidth_) / (kPi * bandwidth_) * cells;
      auto angle = [&](Eigen::Index i) { return std::atan(2 * kPi * bandwidth_ * (double(i) / cells - 0.5) / d_); };
      for (Eigen::Index i = 0; i < n; ++i) v[i] = k * (angle(i + 1) - angle(i));
      break;
    }
    case VarianceKind::UncorrelatedScattering: v.setConstant(scale_ / bandwidth_); break;
    case VarianceKind::GridBacked: {
      const auto breaks = kinks();
      for (Eigen::Index i = 0; i < n; ++i)
        v[i] = cells * integrate<double>([this](double f) { return (*this)(f); }, double(i) / cells,
                                         double(i + 1) / cells, 1e-14 / cells, breaks);
      break;
    }
  }
  return SampledFunction<double>(std::move(v));
}

SampledFunction<double> SpectralVariance::sample_rearranged(Eigen::Index n) const {
  return SampledFunction<double>::sample([this](double f) { return rearranged(f); }, n);
}

SpectralVariance SpectralVariance::rearranged_grid(Eigen::Index n) const {
  return grid_backed(bandwidth_, sample_rearranged(n).values());
}

SpectralVariance SpectralVariance::scaled(double kappa) const {
  require_positive(kappa, "SpectralVariance::scaled: factor");
  SpectralVariance s = *this;
  s.scale_ *= kappa;
  return s;
}

SpectralVariance uncorrelated_scattering_variance(double bandwidth) { return SpectralVariance::uncorrelated(bandwidth); }

double spectral_variance_integral(const OuKernel& kernel, double fhat, double horizon) {
  const double a = kernel.a();
  const double b = kernel.b();
  const double T = horizon > 0 ? horizon : 20 / b;
  const double tail = std::exp(-2 * b * T);
  if (tail > 1e-10) {
    std::ostringstream msg;
    msg << "spectral_variance_integral: horizon T = " << T << " leaves tail energy fraction " << tail
        << " (b = " << b << "); need T >= " << 20 / b;
    throw NumericalError(msg.str());
  }

  const double omega = 2 * kPi * std::abs(fhat);
  const double width = 1 / std::max(kernel.d(), omega);
  static const GaussLegendreRule<double> rule = gauss_legendre<double>(12);

  // sigmahat = 4 * int_0^T int_0^t R(t, s) cos(omega (t - s)) ds dt, using symmetry in (t, s).
  auto inner = [&](double t) {
    const auto panels = std::max<long>(1, long(std::ceil(t / width)));
    const double h = t / double(panels);
    double sum = 0;
    for (long p = 0; p < panels; ++p) {
      sum += integrate_panel(
          [&](double s) { return std::exp(-a * (t - s) - b * (t + s)) * std::cos(omega * (t - s)); }, double(p) * h,
          double(p + 1) * h, rule);
    }
    return sum;
  };
  const auto panels = std::max<long>(1, long(std::ceil(T / width)));
  const double h = T / double(panels);
  double total = 0;
  for (long p = 0; p < panels; ++p) total += integrate_panel(inner, double(p) * h, double(p + 1) * h, rule);
  return 4 * kernel.c() * b * total;
}

SpectralVariance spectral_variance_numeric(const OuKernel& kernel, double bandwidth, Eigen::Index n, double horizon) {
  require_positive(bandwidth, "spectral_variance_numeric: W");
  if (n < 2) throw UsageError("spectral_variance_numeric: need at least two grid points");
  Eigen::VectorXd samples(n);
  for (Eigen::Index i = 0; i < n; ++i)
    samples[i] = spectral_variance_integral(kernel, bandwidth * (SampledFunction<double>::midpoint(i, n) - 0.5), horizon);
  return SpectralVariance::grid_backed(bandwidth, std::move(samples));
}

}  // namespace fadingcap
