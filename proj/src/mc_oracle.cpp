// SPDX-License-Identifier: Apache-2.0

#include "fadingcap/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "fadingcap/quadrature.hpp"

namespace fadingcap {

namespace {

constexpr double kPi = std::numbers::pi;

/// Running mean / M2 with the pairwise (Chan et al.) merge.
struct Moments {
  double count = 0;
  double mean = 0;
  double m2 = 0;

  void add(double x) {
    count += 1;
    const double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.count == 0) return;
    const double total = count + o.count;
    const double delta = o.mean - mean;
    mean += delta * o.count / total;
    m2 += o.m2 + delta * delta * count * o.count / total;
    count = total;
  }

  McEstimate estimate() const {
    McEstimate e;
    e.value = mean;
    e.n_realizations = std::size_t(count);
    e.std_error = count > 1 ? std::sqrt(m2 / (count - 1) / count) : std::numeric_limits<double>::infinity();
    return e;
  }
};

Eigen::MatrixXcd fourier_matrix(const Eigen::VectorXd& tau, double dtau, const Eigen::VectorXd& frequencies) {
  Eigen::MatrixXcd e(frequencies.size(), tau.size());
  for (Eigen::Index i = 0; i < tau.size(); ++i)
    for (Eigen::Index k = 0; k < frequencies.size(); ++k)
      e(k, i) = std::polar(dtau, -2 * kPi * frequencies[k] * tau[i]);
  return e;
}

double rate(const BandQuadrature& q, double rho, const Eigen::Ref<const Eigen::VectorXcd>& response) {
  double sum = 0;
  for (Eigen::Index k = 0; k < q.frequencies.size(); ++k)
    sum += q.weights[k] * std::log1p(rho * q.power[k] * std::norm(response[k]));
  return sum;
}

Eigen::MatrixXcd stack(std::span<const ChannelRealization> realizations) {
  if (realizations.empty()) throw UsageError("Monte Carlo estimate needs at least one realization");
  const auto m = realizations.front().h.size();
  Eigen::MatrixXcd h(m, Eigen::Index(realizations.size()));
  for (std::size_t j = 0; j < realizations.size(); ++j) {
    if (realizations[j].h.size() != m) throw UsageError("realizations use different time grids");
    h.col(Eigen::Index(j)) = realizations[j].h;
  }
  return h;
}

}  // namespace

double McEstimate::z_score(double reference) const {
  if (!(std_error > 0)) return value == reference ? 0.0 : std::numeric_limits<double>::infinity();
  return (value - reference) / std_error;
}

ChannelSampler::ChannelSampler(const OuKernel& kernel, Eigen::Index m, double horizon, std::uint64_t seed)
    : kernel_(kernel), seed_(seed) {
  const double minimum_horizon = 20 / kernel.b();
  horizon_ = horizon > 0 ? horizon : minimum_horizon;
  if (horizon_ < minimum_horizon * (1 - 1e-12)) {
    std::ostringstream msg;
    msg << "ChannelSampler: horizon " << horizon_ << " is shorter than 20/b = " << minimum_horizon;
    throw UsageError(msg.str());
  }
  if (m < 256) throw UsageError("ChannelSampler: need at least 256 time samples");
  dtau_ = horizon_ / double(m);
  times_ = (Eigen::VectorXd::LinSpaced(m, 0, double(m - 1)).array() + 0.5) * dtau_;

  Eigen::MatrixXd cov = kernel_.covariance(times_);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    jitter_ = 1e-12 * cov.trace() / double(m);
    cov.diagonal().array() += jitter_;
    llt.compute(cov);
    if (llt.info() != Eigen::Success)
      throw NumericalError("ChannelSampler: covariance matrix is not positive definite after regularization");
  }
  factor_ = llt.matrixL();
}

Eigen::MatrixXd ChannelSampler::draw_normals(std::uint64_t first, Eigen::Index count, bool imaginary) const {
  const Eigen::Index m = size();
  Eigen::MatrixXd w(m, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const std::uint64_t index = first + std::uint64_t(j);
    std::seed_seq seq{std::uint32_t(seed_), std::uint32_t(seed_ >> 32), std::uint32_t(index),
                      std::uint32_t(index >> 32), std::uint32_t(imaginary ? 1 : 0)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < m; ++i) w(i, j) = normal(rng);
  }
  return w;
}

Eigen::MatrixXcd ChannelSampler::batch(std::uint64_t first, Eigen::Index count) const {
  const auto lower = factor_.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd x = lower * draw_normals(first, count, false);
  const Eigen::MatrixXd y = lower * draw_normals(first, count, true);
  Eigen::MatrixXcd h(size(), count);
  h.real() = x;
  h.imag() = y;
  return h;
}

double ChannelSampler::expected_power(double fhat) const {
  const Eigen::VectorXcd e = fourier_matrix(times_, 1.0, Eigen::VectorXd::Constant(1, fhat)).row(0).transpose();
  const Eigen::VectorXcd v = factor_.triangularView<Eigen::Lower>().transpose() * e;
  return 2 * dtau_ * dtau_ * v.squaredNorm();
}

ChannelRealization ChannelSampler::realization(std::uint64_t index) const {
  return {times_, batch(index, 1).col(0), dtau_};
}

std::vector<ChannelRealization> sample_realizations(const OuKernel& kernel, Eigen::Index m, double horizon,
                                                    std::size_t n, std::uint64_t seed) {
  const ChannelSampler sampler(kernel, m, horizon, seed);
  std::vector<ChannelRealization> out;
  out.reserve(n);
  constexpr Eigen::Index kChunk = 256;
  for (std::size_t first = 0; first < n; first += kChunk) {
    const auto count = Eigen::Index(std::min<std::size_t>(kChunk, n - first));
    const Eigen::MatrixXcd h = sampler.batch(first, count);
    for (Eigen::Index j = 0; j < count; ++j) out.push_back({sampler.times(), h.col(j), sampler.dtau()});
  }
  return out;
}

Eigen::MatrixXcd frequency_response(const Eigen::MatrixXcd& h, const Eigen::VectorXd& tau, double dtau,
                                    const Eigen::VectorXd& frequencies) {
  if (h.rows() != tau.size()) throw UsageError("frequency_response: time grid does not match the samples");
  return fourier_matrix(tau, dtau, frequencies) * h;
}

BandQuadrature band_quadrature(const PowerAllocation& p, double bandwidth, int panels_min, int nodes_per_panel) {
  if (!(bandwidth > 0)) throw DomainError("band_quadrature: W must be positive");
  std::vector<double> edges;
  for (int i = 0; i <= panels_min; ++i) edges.push_back(double(i) / panels_min);
  for (double k : p.kinks())
    if (k > 0 && k < 1) edges.push_back(k);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
              edges.end());

  const auto rule = gauss_legendre<double>(nodes_per_panel);
  const auto panels = Eigen::Index(edges.size() - 1);
  BandQuadrature q;
  q.frequencies.resize(panels * nodes_per_panel);
  q.weights.resize(panels * nodes_per_panel);
  q.power.resize(panels * nodes_per_panel);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < panels; ++j) {
    const double a = edges[std::size_t(j)], b = edges[std::size_t(j) + 1];
    for (int i = 0; i < nodes_per_panel; ++i, ++k) {
      const double f = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i];
      q.frequencies[k] = bandwidth * (f - 0.5);
      q.weights[k] = bandwidth * 0.5 * (b - a) * rule.weights[i];
      q.power[k] = p(f);
    }
  }
  return q;
}

McEstimate estimate_spectral_variance(std::span<const ChannelRealization> realizations, double fhat) {
  const Eigen::MatrixXcd h = stack(realizations);
  const Eigen::VectorXd freq = Eigen::VectorXd::Constant(1, fhat);
  const Eigen::MatrixXcd response = frequency_response(h, realizations.front().tau, realizations.front().dtau, freq);
  Moments m;
  for (Eigen::Index j = 0; j < response.cols(); ++j) m.add(std::norm(response(0, j)));
  return m.estimate();
}

McEstimate estimate_capacity(std::span<const ChannelRealization> realizations, const PowerAllocation& p,
                             const SnrScenario& scenario) {
  scenario.validate();
  const Eigen::MatrixXcd h = stack(realizations);
  const auto q = band_quadrature(p, scenario.bandwidth);
  const Eigen::MatrixXcd response =
      frequency_response(h, realizations.front().tau, realizations.front().dtau, q.frequencies);
  Moments m;
  for (Eigen::Index j = 0; j < response.cols(); ++j) m.add(rate(q, scenario.rho, response.col(j)));
  return m.estimate();
}

McReport run_monte_carlo(const ChannelSampler& sampler, std::size_t n, std::span<const double> spectrum_frequencies,
                         std::span<const CapacityQuery> queries, Eigen::Index batch_size, unsigned workers) {
  if (n == 0) throw UsageError("run_monte_carlo: need at least one realization");
  if (batch_size < 1) throw UsageError("run_monte_carlo: batch size must be positive");
  for (const auto& q : queries) q.scenario.validate();

  std::vector<BandQuadrature> rules;
  std::vector<Eigen::Index> offsets;
  Eigen::Index total = Eigen::Index(spectrum_frequencies.size());
  for (const auto& q : queries) {
    rules.push_back(band_quadrature(q.allocation, q.scenario.bandwidth));
    offsets.push_back(total);
    total += rules.back().frequencies.size();
  }
  Eigen::VectorXd frequencies(total);
  for (std::size_t k = 0; k < spectrum_frequencies.size(); ++k) frequencies[Eigen::Index(k)] = spectrum_frequencies[k];
  for (std::size_t r = 0; r < rules.size(); ++r)
    frequencies.segment(offsets[r], rules[r].frequencies.size()) = rules[r].frequencies;
  const Eigen::MatrixXcd fourier = fourier_matrix(sampler.times(), sampler.dtau(), frequencies);

  const std::size_t batches = (n + std::size_t(batch_size) - 1) / std::size_t(batch_size);
  const std::size_t n_stats = spectrum_frequencies.size() + queries.size();
  std::vector<std::vector<Moments>> partial(batches, std::vector<Moments>(n_stats));

  auto work = [&](unsigned worker) {
    for (std::size_t b = worker; b < batches; b += workers) {
      const std::uint64_t first = b * std::uint64_t(batch_size);
      const auto count = Eigen::Index(std::min<std::size_t>(std::size_t(batch_size), n - first));
      const Eigen::MatrixXcd response = fourier * sampler.batch(first, count);
      auto& stats = partial[b];
      for (Eigen::Index j = 0; j < count; ++j) {
        for (std::size_t k = 0; k < spectrum_frequencies.size(); ++k)
          stats[k].add(std::norm(response(Eigen::Index(k), j)));
        for (std::size_t r = 0; r < rules.size(); ++r)
          stats[spectrum_frequencies.size() + r].add(
              rate(rules[r], queries[r].scenario.rho,
                   response.col(j).segment(offsets[r], rules[r].frequencies.size())));
      }
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  std::vector<Moments> combined(n_stats);
  for (const auto& stats : partial)
    for (std::size_t s = 0; s < n_stats; ++s) combined[s].merge(stats[s]);

  McReport report;
  for (std::size_t k = 0; k < spectrum_frequencies.size(); ++k) report.spectrum.push_back(combined[k].estimate());
  for (std::size_t r = 0; r < queries.size(); ++r)
    report.capacity.push_back(combined[spectrum_frequencies.size() + r].estimate());
  return report;
}

}  // namespace fadingcap
