#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tfd/core.hpp"

namespace tfd {

/// DFT of a real window, flattened as [Re0, Im0, Re1, Im1, ...]. n is the
/// original window length, so data.size() == 2 * n.
struct SpectralVector {
  std::vector<double> data;
  std::size_t n = 0;

  double re(std::size_t k) const { return data[2 * k]; }
  double im(std::size_t k) const { return data[2 * k + 1]; }
  double& re(std::size_t k) { return data[2 * k]; }
  double& im(std::size_t k) { return data[2 * k + 1]; }

  /// Max deviation from conjugate symmetry (Re_k = Re_{n-k}, Im_k = -Im_{n-k},
  /// Im_0 = 0, Im_{n/2} = 0 for even n), relative to the peak magnitude.
  double symmetry_defect() const {
    double peak = 1.0;
    for (double v : data) peak = std::max(peak, std::abs(v));
    double worst = std::abs(im(0));
    if (n % 2 == 0 && n >= 2) worst = std::max(worst, std::abs(im(n / 2)));
    for (std::size_t k = 1; 2 * k < n; ++k) {
      worst = std::max(worst, std::abs(re(k) - re(n - k)));
      worst = std::max(worst, std::abs(im(k) + im(n - k)));
    }
    return worst / peak;
  }
};

namespace detail {

// One period of e^{-2*pi*i*j/n} for j in [0, n); index products are reduced
// mod n before lookup so the phase argument never grows.
struct TwiddleTable {
  std::vector<double> cos_tab, sin_tab;

  explicit TwiddleTable(std::size_t n) : cos_tab(n), sin_tab(n) {
    const double step = 2.0 * 3.14159265358979323846 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      cos_tab[j] = std::cos(step * static_cast<double>(j));
      sin_tab[j] = std::sin(step * static_cast<double>(j));
    }
  }
};

}  // namespace detail

/// X_k = sum_n x_n * e^{-i 2 pi k n / N} for all k, interleaved Re/Im.
/// Direct evaluation with a precomputed twiddle table; windows here are small
/// enough that O(N^2) is not a bottleneck.
inline SpectralVector dft_interleaved(std::span<const double> window) {
  const std::size_t n = window.size();
  if (n == 0) fail(ErrorKind::EmptyWindow, "cannot transform an empty window");
  detail::TwiddleTable tw(n);
  SpectralVector out;
  out.n = n;
  out.data.assign(2 * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t j = 0; j < n; ++j) {
      re += window[j] * tw.cos_tab[idx];
      im -= window[j] * tw.sin_tab[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    out.data[2 * k] = re;
    out.data[2 * k + 1] = im;
  }
  return out;
}

/// Inverse transform: x_n = (1/N) sum_k X_k e^{+i 2 pi k n / N}. Requires a
/// conjugate-symmetric spectrum (real inverse); the imaginary residue is
/// discarded after the check.
inline std::vector<double> idft(const SpectralVector& spec, double symmetry_tol = 1e-6) {
  const std::size_t n = spec.n;
  if (n == 0 || spec.data.size() != 2 * n)
    fail(ErrorKind::EmptyWindow, "spectrum is empty or malformed");
  double defect = spec.symmetry_defect();
  if (defect > symmetry_tol)
    fail(ErrorKind::AsymmetricSpectrum,
         "conjugate symmetry defect " + std::to_string(defect) + " exceeds tolerance");
  detail::TwiddleTable tw(n);
  std::vector<double> out(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < n; ++k) {
      // real part of X_k * e^{+i theta}
      acc += spec.data[2 * k] * tw.cos_tab[idx] - spec.data[2 * k + 1] * tw.sin_tab[idx];
      idx += t;
      if (idx >= n) idx -= n;
    }
    out[t] = acc / static_cast<double>(n);
  }
  return out;
}

}  // namespace tfd
