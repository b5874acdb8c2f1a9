// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fadingcap/errors.hpp"

namespace fadingcap {

template <typename Scalar>
struct GaussLegendreRule {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  Array nodes;    // on [-1, 1], ascending
  Array weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]; roots by Newton iteration on P_n.
template <typename Scalar = double>
GaussLegendreRule<Scalar> gauss_legendre(int n) {
  if (n < 1) throw UsageError("gauss_legendre: need at least one node");
  GaussLegendreRule<Scalar> rule{typename GaussLegendreRule<Scalar>::Array(n),
                                 typename GaussLegendreRule<Scalar>::Array(n)};
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    Scalar x = std::cos(std::numbers::pi_v<Scalar> * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 1;
    for (int iter = 0; iter < 100; ++iter) {
      Scalar p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Scalar dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 2 * eps) break;
    }
    // recompute derivative at the converged root
    Scalar p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = (n == 1) ? Scalar(1) : n * (x * p1 - p0) / (x * x - 1);
    const Scalar w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[m - 1] = 0;
  return rule;
}

/// Apply a rule to f on [a, b].
template <typename Scalar, typename Func>
Scalar integrate_panel(const Func& f, Scalar a, Scalar b, const GaussLegendreRule<Scalar>& rule) {
  const Scalar half = (b - a) / 2;
  const Scalar mid = (a + b) / 2;
  Scalar sum = 0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

template <typename Scalar>
struct QuadratureResult {
  Scalar value = 0;
  Scalar error_estimate = 0;
  int panels = 0;
};

namespace detail {
template <typename Scalar>
const GaussLegendreRule<Scalar>& default_rule() {
  static const GaussLegendreRule<Scalar> rule = gauss_legendre<Scalar>(10);
  return rule;
}
}  // namespace detail

/// Adaptive composite Gauss-Legendre quadrature of f over [a, b].
///
/// Each panel is compared against the sum over its two halves; a panel is accepted once the
/// difference is below its share of abs_tol. Interior breakpoints (kinks, discontinuities of a
/// derivative) always start a new panel.
template <typename Scalar, typename Func>
QuadratureResult<Scalar> integrate_adaptive(const Func& f, Scalar a, Scalar b, Scalar abs_tol,
                                            std::span<const Scalar> breakpoints = {},
                                            int max_panels = 20000) {
  QuadratureResult<Scalar> result;
  if (!(b > a)) return result;
  const auto& rule = detail::default_rule<Scalar>();

  std::vector<Scalar> edges{a};
  for (Scalar p : breakpoints)
    if (p > a && p < b) edges.push_back(p);
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  const Scalar length = b - a;
  struct Panel {
    Scalar lo, hi, whole;
    int depth;
  };
  std::vector<Panel> stack;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k)
    stack.push_back({edges[k], edges[k + 1], integrate_panel(f, edges[k], edges[k + 1], rule), 0});

  int evaluated = 0;
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const Scalar mid = (p.lo + p.hi) / 2;
    const Scalar left = integrate_panel(f, p.lo, mid, rule);
    const Scalar right = integrate_panel(f, mid, p.hi, rule);
    const Scalar diff = std::abs(left + right - p.whole);
    const Scalar share = abs_tol * (p.hi - p.lo) / length;
    const Scalar noise = 64 * std::numeric_limits<Scalar>::epsilon() * (std::abs(left) + std::abs(right));
    if (diff <= share || diff <= noise || p.depth >= 60 || !(mid > p.lo && mid < p.hi)) {
      result.value += left + right;
      result.error_estimate += diff;
      ++result.panels;
    } else {
      stack.push_back({p.lo, mid, left, p.depth + 1});
      stack.push_back({mid, p.hi, right, p.depth + 1});
    }
    if (++evaluated > max_panels)
      throw NumericalError("integrate_adaptive: panel budget exhausted on [" + std::to_string(double(a)) +
                           ", " + std::to_string(double(b)) + "]");
  }
  return result;
}

/// Convenience overload returning only the integral.
template <typename Scalar, typename Func>
Scalar integrate(const Func& f, Scalar a, Scalar b, Scalar abs_tol, std::span<const Scalar> breakpoints = {}) {
  return integrate_adaptive<Scalar>(f, a, b, abs_tol, breakpoints).value;
}

}  // namespace fadingcap
