#pragma once

#include <span>
#include <string>
#include <vector>

#include "tfd/core.hpp"

namespace tfd {

namespace detail {

// Symmetric positive definite pentadiagonal system, stored as three bands:
// d0 = main diagonal (n), d1 = first sub/super diagonal (n-1), d2 = second
// (n-2). Factored in place as L D L^T with the same band structure, then
// solved by forward/back substitution. O(n) time and space.
struct PentaBands {
  std::vector<double> d0, d1, d2;

  explicit PentaBands(std::size_t n)
      : d0(n, 0.0), d1(n > 0 ? n - 1 : 0, 0.0), d2(n > 1 ? n - 2 : 0, 0.0) {}

  std::size_t size() const { return d0.size(); }
};

inline std::vector<double> solve_penta_spd(PentaBands a, std::vector<double> rhs) {
  const std::size_t n = a.size();
  // L D L^T factorization: a.d0 becomes D, a.d1/a.d2 become the unit-lower
  // bands of L.
  for (std::size_t i = 0; i < n; ++i) {
    double di = a.d0[i];
    if (i >= 1) di -= a.d1[i - 1] * a.d1[i - 1] * a.d0[i - 1];
    if (i >= 2) di -= a.d2[i - 2] * a.d2[i - 2] * a.d0[i - 2];
    a.d0[i] = di;
    if (i + 1 < n) {
      double e = a.d1[i];
      if (i >= 1) e -= a.d1[i - 1] * a.d2[i - 1] * a.d0[i - 1];
      a.d1[i] = e / di;
    }
    if (i + 2 < n) a.d2[i] = a.d2[i] / di;
  }
  // forward: L z = rhs
  for (std::size_t i = 0; i < n; ++i) {
    double v = rhs[i];
    if (i >= 1) v -= a.d1[i - 1] * rhs[i - 1];
    if (i >= 2) v -= a.d2[i - 2] * rhs[i - 2];
    rhs[i] = v;
  }
  // diagonal
  for (std::size_t i = 0; i < n; ++i) rhs[i] /= a.d0[i];
  // back: L^T x = z
  for (std::size_t ii = n; ii-- > 0;) {
    double v = rhs[ii];
    if (ii + 1 < n) v -= a.d1[ii] * rhs[ii + 1];
    if (ii + 2 < n) v -= a.d2[ii] * rhs[ii + 2];
    rhs[ii] = v;
  }
  return rhs;
}

// I + lambda * D2^T D2 where D2 is the (n-2) x n second-difference operator.
// Accumulating row outer products handles the n = 3, 4 boundary patterns
// without special cases.
inline PentaBands hp_normal_bands(std::size_t n, double lambda) {
  PentaBands a(n);
  for (std::size_t t = 0; t + 2 < n; ++t) {
    a.d0[t] += lambda;
    a.d0[t + 1] += 4.0 * lambda;
    a.d0[t + 2] += lambda;
    a.d1[t] += -2.0 * lambda;
    a.d1[t + 1] += -2.0 * lambda;
    a.d2[t] += lambda;
  }
  for (std::size_t t = 0; t < n; ++t) a.d0[t] += 1.0;
  return a;
}

}  // namespace detail

/// Trend of one dimension: the minimizer of
/// sum (y_t - tau_t)^2 + lambda * sum ((tau_{t+1}-tau_t) - (tau_t-tau_{t-1}))^2.
inline std::vector<double> hp_trend(std::span<const double> y, double lambda) {
  if (lambda < 0.0) fail(ErrorKind::NegativeLambda, "lambda = " + std::to_string(lambda));
  if (y.size() < 3)
    fail(ErrorKind::SeriesTooShort, "need T >= 3 for second differences, got T = " +
                                        std::to_string(y.size()));
  if (lambda == 0.0) return {y.begin(), y.end()};
  return detail::solve_penta_spd(detail::hp_normal_bands(y.size(), lambda),
                                 {y.begin(), y.end()});
}

/// Hodrick-Prescott decomposition, each dimension solved separately with the
/// same lambda. residual = values - trend by construction.
inline DecomposedSeries hp_filter(const TimeSeries& series, double lambda) {
  const std::size_t dims = series.dims();
  const std::size_t len = series.length();
  DecomposedSeries out;
  out.lambda = lambda;
  out.trend = Matrix(dims, len);
  out.residual = Matrix(dims, len);
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<double> trend = hp_trend(series.values.row(d), lambda);
    for (std::size_t t = 0; t < len; ++t) {
      out.trend(d, t) = trend[t];
      out.residual(d, t) = series.values(d, t) - trend[t];
    }
  }
  return out;
}

/// Decomposes a bare matrix (window contents) the same way.
inline DecomposedSeries hp_filter(const Matrix& values, double lambda) {
  TimeSeries tmp;
  tmp.values = values;
  return hp_filter(tmp, lambda);
}

}  // namespace tfd
