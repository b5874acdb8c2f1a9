// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "fadingcap/mc_oracle.hpp"
#include "fadingcap/specfun.hpp"

using namespace fadingcap;

namespace {

const OuKernel kD1 = OuKernel::normalized_for_d(1, 1);

// Expected value of the Monte Carlo rate estimator on a given time grid: on each quadrature node
// Hhat is circular complex Gaussian with variance expected_power, so E[log(1 + s |Hhat|^2)] is
// exp-E1 in closed form.
double expected_mc_rate(const ChannelSampler& sampler, const PowerAllocation& p, const SnrScenario& s) {
  const auto q = band_quadrature(p, s.bandwidth);
  double sum = 0;
  for (Eigen::Index k = 0; k < q.frequencies.size(); ++k)
    sum += q.weights[k] * expected_log1p_exp(s.rho * q.power[k] * sampler.expected_power(q.frequencies[k]));
  return sum;
}

}  // namespace

TEST_CASE("sampler validates its grid") {
  CHECK_THROWS_AS(ChannelSampler(kD1, 128), UsageError);
  CHECK_THROWS_AS(ChannelSampler(kD1, 256, 10.0), UsageError);
  const ChannelSampler s(kD1, 256);
  CHECK(s.horizon() == doctest::Approx(40.0));
  CHECK(s.times()[0] == doctest::Approx(s.dtau() / 2));
  CHECK(s.times()[255] == doctest::Approx(40.0 - s.dtau() / 2));
  CHECK(s.jitter() >= 0.0);
}

TEST_CASE("realizations are reproducible by (seed, index)") {
  const ChannelSampler a(kD1, 256, 0, 42), b(kD1, 256, 0, 42), c(kD1, 256, 0, 43);
  const Eigen::MatrixXcd block = a.batch(0, 10);
  CHECK(block == b.batch(0, 10));
  CHECK(block != c.batch(0, 10));
  // any subset regenerates identically
  CHECK(a.realization(7).h == block.col(7));
  CHECK(a.batch(5, 3) == block.middleCols(5, 3));
  const auto list = sample_realizations(kD1, 256, 0, 300, 42);
  CHECK(list.size() == 300);
  CHECK(list[299].h == a.realization(299).h);
}

TEST_CASE("pointwise second moments match the kernel") {
  const ChannelSampler s(kD1, 256, 0, 1);
  constexpr Eigen::Index n = 20000;
  const Eigen::MatrixXcd h = s.batch(0, n);
  // sample nearest to tau = 0.5 and one further out
  const Eigen::Index i = Eigen::Index(0.5 / s.dtau());
  const Eigen::Index j = i + 20;
  const double ti = s.times()[i], tj = s.times()[j];

  const Eigen::ArrayXd xi = h.row(i).real().transpose().array(), yi = h.row(i).imag().transpose().array();
  const Eigen::ArrayXd yj = h.row(j).imag().transpose().array(), xj = h.row(j).real().transpose().array();
  auto check_mean = [&](const Eigen::ArrayXd& v, double expected) {
    const double mean = v.mean();
    const double se = std::sqrt((v - mean).square().sum() / double(n - 1) / double(n));
    CHECK(std::abs(mean - expected) <= 4 * se);
  };
  check_mean(xi.square(), kD1(ti, ti));
  check_mean(yi.square(), kD1(ti, ti));
  check_mean(xi * xj, kD1(ti, tj));
  check_mean(xi * yj, 0.0);
  check_mean(xi * yi, 0.0);
  check_mean(xi, 0.0);
  check_mean(yj, 0.0);
}

TEST_CASE("discretization bias of the spectrum is small") {
  // |Hhat|^2 is exponential, so an n = 1e5 estimate has relative standard error 1/sqrt(n);
  // the bias of the M = 1024 grid must stay below half of that.
  const ChannelSampler s(kD1, 1024);
  for (double f : {0.0, 0.1, -0.25, 0.5}) {
    const double closed = spectral_variance_ou(1, 1, f);
    CAPTURE(f);
    CHECK(std::abs(s.expected_power(f) - closed) <= 0.5 / std::sqrt(1e5) * closed);
  }
  CHECK(std::abs(ChannelSampler(kD1, 2048).expected_power(0) - spectral_variance_ou(1, 1, 0)) <
        std::abs(s.expected_power(0) - spectral_variance_ou(1, 1, 0)));
}

TEST_CASE("spectral variance estimates") {
  const auto realizations = sample_realizations(kD1, 256, 0, 20000, 3);
  const ChannelSampler sampler(kD1, 256, 0, 3);
  for (double f : {0.0, 0.2, -0.4}) {
    const auto e = estimate_spectral_variance(realizations, f);
    CAPTURE(f);
    CHECK(e.n_realizations == 20000);
    CHECK(std::abs(e.z_score(spectral_variance_ou(1, 1, f))) <= 4);
    CHECK(std::abs(e.z_score(sampler.expected_power(f))) <= 4);
  }
  const auto plus = estimate_spectral_variance(realizations, 0.3);
  const auto minus = estimate_spectral_variance(realizations, -0.3);
  CHECK(std::abs(plus.value - minus.value) <= 4 * std::hypot(plus.std_error, minus.std_error));

  // linearity in the kernel
  const auto scaled = sample_realizations(kD1.scaled(2.5), 256, 0, 2000, 3);
  const auto small = std::span(realizations).first(2000);
  CHECK(estimate_spectral_variance(scaled, 0.1).value ==
        doctest::Approx(2.5 * estimate_spectral_variance(small, 0.1).value).epsilon(1e-10));
}

TEST_CASE("capacity estimates") {
  const auto sigma = SpectralVariance::ornstein_uhlenbeck(1, 1);
  const auto realizations = sample_realizations(kD1, 256, 0, 20000, 9);

  const auto zero = estimate_capacity(realizations, PowerAllocation::uniform(1), {0, 1});
  CHECK(zero.value == 0.0);
  CHECK(zero.std_error == 0.0);

  const SnrScenario high{10, 1};
  const auto no = estimate_capacity(realizations, PowerAllocation::uniform(1), high);
  CHECK(std::abs(no.z_score(capacity_no_csi(sigma, high).value)) <= 4);

  const SnrScenario low{0.1, 1};
  const auto sol = waterfill(sigma, low);
  const auto part = estimate_capacity(realizations, sol.original_allocation(), low);
  CHECK(std::abs(part.z_score(sol.capacity)) <= 4);
  CHECK(std::abs(part.z_score(expected_mc_rate(ChannelSampler(kD1, 256), sol.original_allocation(), low))) <= 4);
}

TEST_CASE("run_monte_carlo matches the per-realization estimators and ignores the worker count") {
  const ChannelSampler sampler(kD1, 256, 0, 5);
  const std::vector<double> freqs{0.0, 0.3};
  const std::vector<CapacityQuery> queries{{PowerAllocation::uniform(1), {10, 1}},
                                           {waterfill(SpectralVariance::ornstein_uhlenbeck(1, 1), {0.1, 1})
                                                .original_allocation(),
                                            {0.1, 1}}};
  const auto one = run_monte_carlo(sampler, 1000, freqs, queries, 64, 1);
  const auto three = run_monte_carlo(sampler, 1000, freqs, queries, 64, 3);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(one.spectrum[k].value == three.spectrum[k].value);
    CHECK(one.spectrum[k].std_error == three.spectrum[k].std_error);
    CHECK(one.capacity[k].value == three.capacity[k].value);
    CHECK(one.capacity[k].std_error == three.capacity[k].std_error);
  }

  const auto list = sample_realizations(kD1, 256, 0, 1000, 5);
  CHECK(one.spectrum[1].value == doctest::Approx(estimate_spectral_variance(list, 0.3).value).epsilon(1e-10));
  CHECK(one.capacity[0].value ==
        doctest::Approx(estimate_capacity(list, queries[0].allocation, queries[0].scenario).value).epsilon(1e-10));
  CHECK(one.capacity[1].std_error ==
        doctest::Approx(estimate_capacity(list, queries[1].allocation, queries[1].scenario).std_error).epsilon(1e-8));

  CHECK_THROWS_AS(run_monte_carlo(sampler, 0, freqs, queries), UsageError);
}

TEST_CASE("doubling the time grid moves the capacity estimate by less than one standard error") {
  // Standard error of an n = 1e5 run, estimated from a short run.
  const auto sigma = SpectralVariance::ornstein_uhlenbeck(1, 1);
  for (double rho : {0.1, 10.0}) {
    const SnrScenario s{rho, 1};
    const std::vector<CapacityQuery> queries{{PowerAllocation::uniform(1), s}, {waterfill(sigma, s).original_allocation(), s}};
    const ChannelSampler coarse(kD1, 512), fine(kD1, 1024);
    const auto pilot = run_monte_carlo(fine, 2000, {}, queries);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const double se = pilot.capacity[q].std_error * std::sqrt(2000.0 / 1e5);
      const double shift = std::abs(expected_mc_rate(fine, queries[q].allocation, s) -
                                    expected_mc_rate(coarse, queries[q].allocation, s));
      CAPTURE(rho);
      CAPTURE(q);
      CHECK(shift < se);
    }
  }
}
