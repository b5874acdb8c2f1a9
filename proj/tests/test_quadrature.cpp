// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fadingcap/quadrature.hpp"

using namespace fadingcap;

TEST_CASE("Gauss-Legendre rule integrates polynomials of degree 2n-1 exactly") {
  for (int n : {1, 2, 5, 10, 16}) {
    const auto rule = gauss_legendre<double>(n);
    CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
    for (int degree = 0; degree <= 2 * n - 1; ++degree) {
      double sum = 0;
      for (int i = 0; i < n; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], degree);
      const double exact = degree % 2 ? 0.0 : 2.0 / (degree + 1);
      CAPTURE(n);
      CAPTURE(degree);
      CHECK(std::abs(sum - exact) < 1e-13);
    }
  }
}

TEST_CASE("Gauss-Legendre nodes are ascending and symmetric") {
  const auto rule = gauss_legendre<double>(11);
  for (int i = 1; i < 11; ++i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
  for (int i = 0; i < 11; ++i) CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[10 - i]).epsilon(1e-15));
  CHECK(rule.nodes[5] == 0.0);
}

TEST_CASE("adaptive integration of smooth and peaked integrands") {
  CHECK(integrate<double>([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-13) ==
        doctest::Approx(std::expm1(1.0)).epsilon(1e-13));
  // Lorentzian with a narrow peak
  const double d = 1e-3;
  const double exact = 2 * std::atan(1.0 / d) / d;
  CHECK(integrate<double>([&](double x) { return 1 / (d * d + x * x); }, -1.0, 1.0, 1e-9) ==
        doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("breakpoints resolve a kink") {
  const std::vector<double> breaks{0.3};
  const auto r = integrate_adaptive<double>([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 1e-14, breaks);
  CHECK(r.value == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-14));
  CHECK(r.panels <= 4);
}

TEST_CASE("empty interval and exhausted budget") {
  CHECK(integrate<double>([](double) { return 1.0; }, 1.0, 1.0, 1e-12) == 0.0);
  CHECK_THROWS_AS(integrate_adaptive<double>([](double x) { return std::sin(1 / x); }, 1e-12, 1.0, 1e-15, {}, 50),
                  NumericalError);
}
