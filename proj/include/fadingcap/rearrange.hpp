// SPDX-License-Identifier: Apache-2.0

#pragma once

// Decreasing rearrangement and majorization for nonnegative functions on (0, 1), represented by
// midpoint samples on a uniform grid. Integrals become means and the rearrangement becomes a
// stable descending sort.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "fadingcap/errors.hpp"

namespace fadingcap {

inline constexpr Eigen::Index kDefaultGridSize = 4096;

template <typename Scalar = double>
class SampledFunction {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit SampledFunction(Vector values) : values_(std::move(values)) {
    if (values_.size() < 2) throw UsageError("SampledFunction: need at least two samples");
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]) || values_[i] < 0)
        throw DomainError("SampledFunction: sample " + std::to_string(i) + " is negative or not finite");
    }
  }

  /// Samples f at the midpoints (i + 1/2) / n.
  template <typename Func>
  static SampledFunction sample(const Func& f, Eigen::Index n = kDefaultGridSize) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = f((Scalar(i) + Scalar(0.5)) / Scalar(n));
    return SampledFunction(std::move(v));
  }

  static Scalar midpoint(Eigen::Index i, Eigen::Index n) { return (Scalar(i) + Scalar(0.5)) / Scalar(n); }

  const Vector& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  Scalar operator[](Eigen::Index i) const { return values_[i]; }
  Scalar integral() const { return values_.mean(); }
  Scalar max() const { return values_.maxCoeff(); }

 private:
  Vector values_;
};

template <typename Scalar = double>
struct Rearrangement {
  using Vector = typename SampledFunction<Scalar>::Vector;

  Vector sorted_values;
  /// Discrete recovery map: values[i] == sorted_values[permutation[i]].
  std::vector<Eigen::Index> permutation;

  Vector recover() const {
    Vector out(sorted_values.size());
    for (std::size_t i = 0; i < permutation.size(); ++i) out[Eigen::Index(i)] = sorted_values[permutation[i]];
    return out;
  }
};

/// d_x(s) = |{t : x(t) > s}|.
template <typename Scalar>
Scalar distribution_function(const SampledFunction<Scalar>& x, Scalar s) {
  return Scalar((x.values().array() > s).count()) / Scalar(x.size());
}

/// x* as a stable descending sort. Ties keep their original left-to-right order, which is the
/// tie rule of the continuous recovery map phi(s) = |{x > x(s)}| + |{t <= s : x(t) = x(s)}|.
template <typename Scalar>
Rearrangement<Scalar> decreasing_rearrangement(const SampledFunction<Scalar>& x) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return x[i] > x[j]; });

  Rearrangement<Scalar> r;
  r.sorted_values.resize(n);
  r.permutation.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    r.sorted_values[k] = x[order[std::size_t(k)]];
    r.permutation[std::size_t(order[std::size_t(k)])] = k;
  }
  return r;
}

enum class MajorizationOrder { Majorizes, MajorizedBy, Incomparable };

inline const char* to_string(MajorizationOrder o) {
  switch (o) {
    case MajorizationOrder::Majorizes: return "majorizes";
    case MajorizationOrder::MajorizedBy: return "majorized-by";
    case MajorizationOrder::Incomparable: return "incomparable";
  }
  return "?";
}

/// Prefix sums accumulate rounding roughly linearly in N.
template <typename Scalar>
Scalar default_majorization_tolerance(const SampledFunction<Scalar>& x, const SampledFunction<Scalar>& y) {
  return Scalar(1e-9) * Scalar(x.size()) * std::max(x.max(), y.max());
}

namespace detail {
template <typename Scalar>
bool prefix_dominates(const typename SampledFunction<Scalar>::Vector& xs,
                      const typename SampledFunction<Scalar>::Vector& ys, Scalar tol) {
  Scalar px = 0, py = 0;
  for (Eigen::Index k = 0; k < xs.size(); ++k) {
    px += xs[k];
    py += ys[k];
    if (px < py - tol) return false;
  }
  return std::abs(px - py) <= tol;
}
}  // namespace detail

/// Majorization test on sums of the sorted samples (N times the prefix integrals).
/// Returns Majorizes when x majorizes y, which includes x equal to y.
template <typename Scalar>
MajorizationOrder majorizes(const SampledFunction<Scalar>& x, const SampledFunction<Scalar>& y, Scalar tol) {
  if (x.size() != y.size())
    throw UsageError("majorizes: grid sizes differ (" + std::to_string(x.size()) + " vs " + std::to_string(y.size()) +
                     ")");
  if (tol < 0) throw UsageError("majorizes: tolerance must be nonnegative");
  const auto xs = decreasing_rearrangement(x).sorted_values;
  const auto ys = decreasing_rearrangement(y).sorted_values;
  if (detail::prefix_dominates<Scalar>(xs, ys, tol)) return MajorizationOrder::Majorizes;
  if (detail::prefix_dominates<Scalar>(ys, xs, tol)) return MajorizationOrder::MajorizedBy;
  return MajorizationOrder::Incomparable;
}

template <typename Scalar>
MajorizationOrder majorizes(const SampledFunction<Scalar>& x, const SampledFunction<Scalar>& y) {
  return majorizes(x, y, default_majorization_tolerance(x, y));
}

/// x*(0+) > y*(0+) by more than tol.
template <typename Scalar>
bool first_sample_dominates(const SampledFunction<Scalar>& x, const SampledFunction<Scalar>& y, Scalar tol = 0) {
  return x.max() > y.max() + tol;
}

/// (mean of g(x), mean of g(y)). For concave g and x majorizing y the first is not larger.
template <typename Scalar, typename Func>
std::pair<Scalar, Scalar> schur_order_witness(const SampledFunction<Scalar>& x, const SampledFunction<Scalar>& y,
                                              const Func& g) {
  auto mean_of = [&](const SampledFunction<Scalar>& v) {
    Scalar s = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += g(v[i]);
    return s / Scalar(v.size());
  };
  return {mean_of(x), mean_of(y)};
}

}  // namespace fadingcap
