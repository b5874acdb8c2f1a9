// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fadingcap/capacity.hpp"
#include "fadingcap/specfun.hpp"
#include "discrete_oracle.hpp"

using namespace fadingcap;
using fadingcap::oracle::discretize;
using fadingcap::oracle::marginal;

namespace {

const std::vector<double> kFamily{0.5, 1, 2, 5, 10};

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> out;
  for (int i = 0; i < points; ++i) out.push_back(lo * std::pow(hi / lo, double(i) / (points - 1)));
  return out;
}

}  // namespace

TEST_CASE("capacity_no_csi: trivial cases") {
  const auto flat = SpectralVariance::uncorrelated(1);
  CHECK(capacity_no_csi(flat, {0, 1}).value == 0.0);
  CHECK(capacity_no_csi(SpectralVariance::ornstein_uhlenbeck(1, 1), {0, 1}).value == 0.0);
  CHECK(capacity_no_csi(flat, {10, 1}).value == doctest::Approx(2.01464254470845167910).epsilon(1e-12));
  CHECK(capacity_no_csi(flat, {10, 1}).value == doctest::Approx(expected_log1p_exp(10.0)).epsilon(1e-13));
  // W = 2: sigma = 1/2, p = 1/2, so alpha = rho / 4 on a band twice as wide
  CHECK(capacity_no_csi(SpectralVariance::uncorrelated(2), {8, 2}).value ==
        doctest::Approx(2 * expected_log1p_exp(2.0)).epsilon(1e-12));
  CHECK(capacity_no_csi(flat, {1, 1}).method == CapacityMethod::NoCsi);
  CHECK_THROWS_AS(capacity_no_csi(flat, {-1, 1}), DomainError);
  CHECK_THROWS_AS(capacity_no_csi(flat, {1, 0}), DomainError);
}

TEST_CASE("capacity_no_csi is Schur-concave along the OU family") {
  for (double rho : log_grid(1e-2, 1e3, 25)) {
    double previous = -1;
    for (double d : kFamily) {
      const double c = capacity_no_csi(SpectralVariance::ornstein_uhlenbeck(d, 1), {rho, 1}).value;
      CAPTURE(rho);
      CAPTURE(d);
      CHECK(c >= previous - 1e-9);
      previous = c;
    }
    CHECK(capacity_no_csi(SpectralVariance::uncorrelated(1), {rho, 1}).value >= previous - 1e-9);
  }
  CHECK(capacity_no_csi(SpectralVariance::ornstein_uhlenbeck(1, 1), {10, 1}).value <
        capacity_no_csi(SpectralVariance::ornstein_uhlenbeck(5, 1), {10, 1}).value);
}

TEST_CASE("high_snr_gap") {
  const auto s1 = SpectralVariance::ornstein_uhlenbeck(1, 1);
  const auto s5 = SpectralVariance::ornstein_uhlenbeck(5, 1);
  CHECK(high_snr_gap(s1, s1, 1) == 0.0);
  const double gap = high_snr_gap(s1, s5, 1);
  CHECK(gap < 0);
  CHECK(high_snr_gap(s5, s1, 1) == doctest::Approx(-gap).epsilon(1e-12));

  double previous = INFINITY;
  for (double rho : {1e2, 1e3, 1e4}) {
    const double residual =
        std::abs(capacity_no_csi(s1, {rho, 1}).value - capacity_no_csi(s5, {rho, 1}).value - gap);
    CAPTURE(rho);
    CHECK(residual < previous);
    previous = residual;
  }
  CHECK(previous <= 1e-3);

  // the approximation itself differs from the exact rate by less than a constant over rho
  const double exact = capacity_no_csi(s1, {1e4, 1}).value;
  CHECK(std::abs(capacity_high_snr_approx(s1, {1e4, 1}).value - exact) < 1e-2);
  CHECK(capacity_high_snr_approx(s1, {1e4, 1}).value - capacity_high_snr_approx(s5, {1e4, 1}).value ==
        doctest::Approx(gap).epsilon(1e-10));

  CHECK_THROWS_AS(high_snr_gap(s1, SpectralVariance::ornstein_uhlenbeck(5, 2), 1), UsageError);
  Eigen::VectorXd with_zero(2);
  with_zero << 0.0, 2.0;
  CHECK_THROWS_AS(high_snr_gap(s1, SpectralVariance::grid_backed(1, with_zero), 1), DomainError);
}

TEST_CASE("waterfill: constant sigma gives the uniform allocation") {
  for (double w : {1.0, 3.0}) {
    const auto flat = SpectralVariance::uncorrelated(w);
    for (double rho : {1e-3, 1.0, 1e3}) {
      const auto sol = waterfill(flat, {rho, w});
      CHECK(sol.theta == 1.0);
      for (double f : {0.01, 0.4, 0.99}) CHECK(sol.allocation(f) == doctest::Approx(1 / w).epsilon(1e-10));
      CHECK(capacity_partial_csi(flat, {rho, w}).value ==
            doctest::Approx(capacity_no_csi(flat, {rho, w}).value).epsilon(1e-10));
    }
  }
}

TEST_CASE("waterfill: degenerate rho = 0") {
  const auto sol = waterfill(SpectralVariance::ornstein_uhlenbeck(1, 1), {0, 1});
  CHECK(sol.degenerate);
  CHECK(sol.capacity == 0.0);
  CHECK(sol.theta == 0.0);
  CHECK(sol.allocation(0.3) == 1.0);
  CHECK(capacity_partial_csi(SpectralVariance::ornstein_uhlenbeck(1, 1), {0, 1}).value == 0.0);
}

TEST_CASE("waterfill: feasibility and KKT conditions") {
  for (double d : kFamily) {
    for (double w : {1.0, 2.0}) {
      const auto sigma = SpectralVariance::ornstein_uhlenbeck(d, w);
      for (double rho : log_grid(1e-3, 1e3, 13)) {
        const auto sol = waterfill(sigma, {rho, w});
        CAPTURE(d);
        CAPTURE(w);
        CAPTURE(rho);
        CHECK(sol.nu > 0);
        CHECK(sol.power_residual <= 1e-8);
        CHECK(sol.kkt_residual <= 1e-7);
        CHECK(std::abs(sol.rearranged_allocation().total() - 1 / w) <= 1e-8);
        CHECK(std::abs(sol.original_allocation().total() - 1 / w) <= 1e-8);

        // stationarity through the independent marginal-rate formula, and slackness
        for (int i = 0; i < 64; ++i) {
          const double f = (i + 0.5) / 64;
          const double g = rho * sigma.rearranged(f);
          const double p = sol.allocation_rearranged(f);
          if (f < sol.theta) {
            CHECK(p > 0);
            CHECK(std::abs(g * marginal(g * p) - sol.nu) <= 1e-7 * std::max(1.0, sol.nu));
          } else {
            CHECK(p == 0.0);
            CHECK(g <= sol.nu + 1e-7);
          }
        }
        // p_o* is nonincreasing
        for (int i = 1; i < 64; ++i) CHECK(sol.allocation_rearranged(i / 64.0) <= sol.allocation_rearranged((i - 1) / 64.0));
      }
    }
  }
}

TEST_CASE("waterfill agrees with an independent discretized solver") {
  constexpr Eigen::Index n = 2000;
  for (double d : {1.0, 5.0}) {
    const auto sigma = SpectralVariance::ornstein_uhlenbeck(d, 1);
    for (double rho : {0.01, 0.1, 1.0, 10.0, 100.0}) {
      const auto problem = discretize(sigma, rho, n);
      const double oracle = problem.objective(problem.dual_solution());
      CAPTURE(d);
      CAPTURE(rho);
      CHECK(std::abs(capacity_partial_csi(sigma, {rho, 1}).value - oracle) <= 1e-5);
    }
  }
  // projected gradient on a coarser grid reaches the same discretized optimum
  const auto problem = discretize(SpectralVariance::ornstein_uhlenbeck(1, 1), 0.01, 200);
  const double dual = problem.objective(problem.dual_solution());
  const double pg = problem.objective(problem.projected_gradient(3000));
  CHECK(std::abs(pg - dual) <= 1e-8);
}

TEST_CASE("waterfill beats random feasible allocations") {
  std::mt19937_64 rng(11);
  std::exponential_distribution<double> cell(1.0);
  std::bernoulli_distribution drop(0.3);
  for (double d : {1.0, 5.0}) {
    const auto sigma = SpectralVariance::ornstein_uhlenbeck(d, 1);
    for (double rho : {0.01, 1.0, 100.0}) {
      const double best = capacity_partial_csi(sigma, {rho, 1}).value;
      for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd v(16);
        for (auto& x : v) x = drop(rng) ? 0.0 : cell(rng);
        if (v.sum() == 0) v[0] = 1;
        v *= double(v.size()) / v.sum();
        const auto p = PowerAllocation::from_cells(v);
        CHECK(std::abs(p.total() - 1.0) <= 1e-12);
        CHECK(capacity_with_allocation(sigma, p, {rho, 1}).value <= best + 1e-10);
      }
      CHECK(capacity_no_csi(sigma, {rho, 1}).value <= best + 1e-10);
    }
  }
}

TEST_CASE("capacities evaluated on the rearranged variance agree") {
  for (double d : {1.0, 5.0}) {
    const auto sigma = SpectralVariance::ornstein_uhlenbeck(d, 1);
    const auto grid = SpectralVariance::grid_backed(1, sigma.sample(4096).values());
    const auto sorted = grid.rearranged_grid(4096);
    for (double rho : {0.01, 1.0, 100.0}) {
      const SnrScenario s{rho, 1};
      CAPTURE(d);
      CAPTURE(rho);
      CHECK(std::abs(capacity_no_csi(grid, s).value - capacity_no_csi(sorted, s).value) <= 1e-6);
      CHECK(std::abs(capacity_partial_csi(grid, s).value - capacity_partial_csi(sorted, s).value) <= 1e-12);
      CHECK(std::abs(capacity_no_csi(sigma, s).value - capacity_no_csi(sorted, s).value) <= 1e-6);
      CHECK(std::abs(capacity_partial_csi(sigma, s).value - capacity_partial_csi(sorted, s).value) <= 1e-6);
      // the allocation mapped back onto the original axis achieves the same rate
      const auto sol = waterfill(sigma, s);
      CHECK(capacity_with_allocation(sigma, sol.original_allocation(), s).value ==
            doctest::Approx(sol.capacity).epsilon(1e-9));
    }
  }
}

TEST_CASE("capacities are nondecreasing in rho and partial CSI dominates") {
  for (double d : kFamily) {
    const auto sigma = SpectralVariance::ornstein_uhlenbeck(d, 1);
    double prev_no = 0, prev_part = 0;
    for (double rho : log_grid(1e-3, 1e3, 19)) {
      const double no = capacity_no_csi(sigma, {rho, 1}).value;
      const double part = capacity_partial_csi(sigma, {rho, 1}).value;
      CHECK(no >= prev_no);
      CHECK(part >= prev_part);
      CHECK(part >= no - 1e-10);
      prev_no = no;
      prev_part = part;
    }
  }
}

TEST_CASE("partial CSI ordering flips between low and high SNR") {
  const auto s1 = SpectralVariance::ornstein_uhlenbeck(1, 1);
  const auto s5 = SpectralVariance::ornstein_uhlenbeck(5, 1);
  CHECK(capacity_partial_csi(s1, {0.01, 1}).value > capacity_partial_csi(s5, {0.01, 1}).value);
  CHECK(capacity_partial_csi(s1, {100, 1}).value < capacity_partial_csi(s5, {100, 1}).value);
  CHECK(capacity_partial_csi(s1, {0.01, 1}).value == doctest::Approx(0.02058).epsilon(1e-3));
  CHECK(capacity_partial_csi(s5, {0.01, 1}).value == doctest::Approx(0.01072).epsilon(1e-3));

  // at high SNR the optimum approaches equal power
  const double gap2 = capacity_partial_csi(s1, {1e2, 1}).value - capacity_no_csi(s1, {1e2, 1}).value;
  const double gap4 = capacity_partial_csi(s1, {1e4, 1}).value - capacity_no_csi(s1, {1e4, 1}).value;
  CHECK(gap4 < gap2);
  CHECK(gap4 < 1e-3);
  CHECK(waterfill(s1, {1e4, 1}).theta == 1.0);
}

TEST_CASE("active volume grows with rho") {
  const auto sigma = SpectralVariance::ornstein_uhlenbeck(1, 1);
  CHECK(active_volume(sigma, {0.01, 1}) == doctest::Approx(0.19).epsilon(0.05));
  double previous = 0;
  for (double rho : log_grid(1e-3, 1e3, 31)) {
    const double theta = active_volume(sigma, {rho, 1});
    CAPTURE(rho);
    CHECK(theta >= previous);
    if (theta < 1) CHECK(theta > previous);
    CHECK(theta > 0);
    CHECK(theta <= 1);
    previous = theta;
  }
  CHECK(active_volume(SpectralVariance::uncorrelated(1), {1e-3, 1}) == 1.0);

  // rho~(eps): below it, fewer than eps of the frequencies are used
  constexpr double eps = 0.2;
  double lo = 1e-6, hi = 1e3;
  for (int k = 0; k < 60; ++k) {
    const double mid = std::sqrt(lo * hi);
    (active_volume(sigma, {mid, 1}) < eps ? lo : hi) = mid;
  }
  for (double rho : log_grid(1e-6, 0.999 * lo, 15)) CHECK(active_volume(sigma, {rho, 1}) < eps);
  CHECK(active_volume(sigma, {hi * 1.001, 1}) >= eps);
}
