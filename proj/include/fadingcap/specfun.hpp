// SPDX-License-Identifier: Apache-2.0

#pragma once

// Exponential-integral kernels for Rayleigh-fading capacity.
//
// With z ~ Exp(1):
//   E[log(1 + a z)]  = exp(1/a) E1(1/a)
//   E[z / (1 + x z)] = 1/x - exp(1/x) E1(1/x) / x^2   (psi)
//
// Everything is evaluated through the scaled form exp(y) E1(y), which stays O(1/y) for large y
// and never needs exp(y) on its own.

#include <cmath>
#include <limits>
#include <string>

#include "fadingcap/errors.hpp"

namespace fadingcap {

namespace detail {

template <typename Scalar>
inline constexpr Scalar euler_gamma = Scalar(0.57721566490153286060651209008240243104215933593992L);

/// K_k = b_k + a_{k+1} / (b_{k+1} + a_{k+2} / (...)), b_j = y + 2j - 1, a_j = -(j-1)^2.
/// exp(y) E1(y) = 1 / K_1. Modified Lentz; requires y > 0 (intended for y > 1).
template <typename Scalar>
Scalar e1_continued_fraction(Scalar y, int first) {
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar tiny = std::numeric_limits<Scalar>::min() / eps;
  Scalar f = y + Scalar(2 * first - 1);
  Scalar c = f;
  Scalar d = 0;
  for (int k = first + 1; k < first + 10000; ++k) {
    const Scalar a = -Scalar(k - 1) * Scalar(k - 1);
    const Scalar b = y + Scalar(2 * k - 1);
    d = b + a * d;
    if (std::abs(d) < tiny) d = tiny;
    c = b + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1 / d;
    const Scalar delta = c * d;
    f *= delta;
    if (std::abs(delta - 1) <= eps) return f;
  }
  throw NumericalError("E1 continued fraction did not converge at y = " + std::to_string(double(y)));
}

/// exp(y) E1(y) from the power series, y in (0, 1].
template <typename Scalar>
Scalar scaled_e1_series(Scalar y) {
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Scalar sum = 0;
  Scalar term = 1;  // (-1)^(n+1) y^n / n!
  for (int n = 1; n < 200; ++n) {
    term *= -y / Scalar(n);
    const Scalar contribution = -term / Scalar(n);
    sum += contribution;
    if (std::abs(contribution) <= eps * std::abs(sum)) break;
  }
  return std::exp(y) * (-euler_gamma<Scalar> - std::log(y) + sum);
}

/// 1 - psi(x) = (1 - t + y t) / (y + 1 - t) with y = 1/x, t = 1/K_2, for 0 < x < 1. All terms are
/// positive, so this keeps full relative accuracy as psi -> 1.
template <typename Scalar>
Scalar psi_complement(Scalar x) {
  const Scalar y = 1 / x;
  if (!std::isfinite(y)) return 2 * x;
  const Scalar t = 1 / e1_continued_fraction(y, 2);
  return (1 - t + y * t) / (y + 1 - t);
}

template <typename Scalar>
void require_finite(Scalar v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + ": argument must be finite");
}

}  // namespace detail

/// exp(y) * E1(y) for y > 0.
template <typename Scalar>
Scalar scaled_e1(Scalar y) {
  detail::require_finite(y, "scaled_e1");
  if (!(y > 0)) throw DomainError("scaled_e1: argument must be positive, got " + std::to_string(double(y)));
  if (y <= 1) return detail::scaled_e1_series(y);
  return 1 / detail::e1_continued_fraction(y, 1);
}

/// E[log(1 + alpha z)] for z ~ Exp(1), alpha >= 0.
template <typename Scalar>
Scalar expected_log1p_exp(Scalar alpha) {
  detail::require_finite(alpha, "expected_log1p_exp");
  if (alpha < 0) throw DomainError("expected_log1p_exp: alpha must be nonnegative");
  if (alpha == 0) return 0;
  const Scalar y = 1 / alpha;
  if (!std::isfinite(y)) return alpha;  // alpha below the reciprocal range; value equals alpha to rounding
  return scaled_e1(y);
}

/// psi(x) = E[z / (1 + x z)], z ~ Exp(1). psi(0) = 1, strictly decreasing and convex, -> 0.
template <typename Scalar>
Scalar psi(Scalar x) {
  if (std::isnan(x)) throw DomainError("psi: argument is NaN");
  if (x < 0) throw DomainError("psi: argument must be nonnegative");
  if (x == 0) return 1;
  if (std::isinf(x)) return 0;
  const Scalar y = 1 / x;
  if (!std::isfinite(y)) return 1;
  if (y <= 1) return y - y * y * detail::scaled_e1_series(y);
  // psi = 1 - y exp(y) E1(y); the complement is accurate, leaving one rounding near psi = 1
  return 1 - detail::psi_complement(x);
}

/// psi'(x) = -E[z^2 / (1 + x z)^2].
template <typename Scalar>
Scalar psi_derivative(Scalar x) {
  if (x < 0) throw DomainError("psi_derivative: argument must be nonnegative");
  if (x < Scalar(1e-2)) {
    // asymptotic series sum_k (-1)^k (k+1) (k+2)! x^k
    return -(2 - x * (12 - x * (72 - x * (480 - x * 3600))));
  }
  const Scalar y = 1 / x;
  const Scalar q = psi(x) * x;  // = 1 - y exp(y) E1(y) = E[1/(1+xz)^2] / y
  return -y * y * (2 * q - 1 + y * q);
}

namespace detail {

/// Safeguarded Newton for an increasing (sign = 1) or decreasing (sign = -1) g on (lo, hi).
template <typename Scalar, typename G, typename Slope>
Scalar newton_bracketed(G g, Slope slope, Scalar lo, Scalar hi, Scalar x, int sign, const char* what) {
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  if (!(x > lo && x < hi)) x = (lo + hi) / 2;
  for (int iter = 0; iter < 400; ++iter) {
    const Scalar residual = g(x);
    if (residual == 0) return x;
    if ((residual > 0) == (sign > 0))
      hi = x;
    else
      lo = x;
    if (hi - lo <= 2 * eps * hi) return (lo + hi) / 2;
    Scalar next = x - residual / slope(x);
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    if (std::abs(next - x) <= eps * x) return next;
    x = next;
  }
  throw NumericalError(std::string(what) + ": no convergence");
}

}  // namespace detail

/// Inverse of psi on (0, 1], extended by 0 for u > 1.
template <typename Scalar>
Scalar psi_inverse(Scalar u) {
  if (std::isnan(u)) throw DomainError("psi_inverse: argument is NaN");
  if (!(u > 0)) throw DomainError("psi_inverse: psi never reaches values <= 0");
  if (u >= 1) return 0;

  if (u > Scalar(0.5)) {
    // psi(1) < 1/2, so the root lies in (0, 1); solve 1 - psi(x) = 1 - u, where 1 - u is exact.
    const Scalar v = 1 - u;
    return detail::newton_bracketed<Scalar>([v](Scalar x) { return detail::psi_complement(x) - v; },
                                            [](Scalar x) { return -psi_derivative(x); }, Scalar(0), Scalar(1),
                                            v / 2, 1, "psi_inverse");
  }

  Scalar lo = 0;
  Scalar hi = std::max(Scalar(1), 4 / u);
  for (int k = 0; psi(hi) >= u; ++k) {
    if (k > 2000 || !std::isfinite(hi)) throw NumericalError("psi_inverse: cannot bracket the root");
    lo = hi;
    hi *= 2;
  }
  return detail::newton_bracketed<Scalar>([u](Scalar x) { return psi(x) - u; },
                                          [](Scalar x) { return psi_derivative(x); }, lo, hi, 1 / u, -1,
                                          "psi_inverse");
}

}  // namespace fadingcap
