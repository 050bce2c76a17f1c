#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "tfd/core.hpp"
#include "tfd/decompose.hpp"
#include "tfd/spectral.hpp"

namespace tfd {

enum class InjectionKind {
  PointScale,
  Exchange,
  Mixup,
  FreqAnomaly,
  SlowSlope,
};

enum class FreqAnomalyMode {
  ScaleBin,
  ZeroBin,
  ShiftPeak,
};

struct AugmentConfig {
  double normal_ratio = 0.5;
  double anomaly_ratio = 0.4;
  double freq_perturb_scale = 0.05;
  double smooth_lambda = 10.0;
  std::set<InjectionKind> methods = {InjectionKind::PointScale, InjectionKind::Exchange,
                                     InjectionKind::Mixup, InjectionKind::FreqAnomaly,
                                     InjectionKind::SlowSlope};

  void validate() const {
    if (normal_ratio < 0.0 || normal_ratio > 1.0 || anomaly_ratio < 0.0 || anomaly_ratio > 1.0)
      fail(ErrorKind::InvalidConfig, "augmentation ratios must lie in [0,1]");
    if (!std::isfinite(freq_perturb_scale) || freq_perturb_scale < 0.0)
      fail(ErrorKind::InvalidConfig, "freq_perturb_scale must be finite and nonnegative");
    if (anomaly_ratio > 0.0 && methods.empty())
      fail(ErrorKind::NoMethodsEnabled, "anomaly_ratio > 0 with no injection methods enabled");
  }

  bool operator==(const AugmentConfig&) const = default;
};

namespace detail {

inline void check_span(Span span, std::size_t length, const char* what) {
  if (span.len == 0 || span.end() > length)
    fail(ErrorKind::SpanOutOfRange, std::string(what) + " span [" + std::to_string(span.start) +
                                        ", " + std::to_string(span.end()) + ") vs length " +
                                        std::to_string(length));
}

inline std::vector<std::uint8_t> labels_or_zeros(const TimeSeries& s) {
  if (s.has_labels()) return s.labels;
  return std::vector<std::uint8_t>(s.length(), 0);
}

inline double row_rms(std::span<const double> row) {
  double acc = 0.0;
  for (double v : row) acc += v * v;
  return std::sqrt(acc / static_cast<double>(row.size()));
}

}  // namespace detail

/// "More normal" sample: the HP trend with the noisy residual dropped.
inline TimeSeries smooth_normal(const TimeSeries& series, double lambda) {
  TimeSeries out = series;
  out.values = hp_filter(series, lambda).trend;
  out.labels.assign(series.length(), 0);
  return out;
}

/// Diversifies a normal sample by jittering the spectrum: independent
/// Gaussian noise on Re/Im of bins 1..floor((N-1)/2), conjugate-mirrored so
/// the inverse stays real.
inline TimeSeries augment_normal_freq(const TimeSeries& series, double scale, RngSeed seed) {
  if (scale < 0.0 || !std::isfinite(scale))
    fail(ErrorKind::InvalidConfig, "perturbation scale must be finite and nonnegative");
  Rng rng(seed);
  TimeSeries out = series;
  const std::size_t n = series.length();
  for (std::size_t d = 0; d < series.dims(); ++d) {
    SpectralVector spec = dft_interleaved(series.values.row(d));
    double sigma = scale * detail::row_rms(spec.data);
    for (std::size_t k = 1; 2 * k < n; ++k) {
      double dre = rng.normal(0.0, sigma);
      double dim = rng.normal(0.0, sigma);
      spec.re(k) += dre;
      spec.im(k) += dim;
      spec.re(n - k) += dre;
      spec.im(n - k) -= dim;
    }
    std::vector<double> back = idft(spec);
    for (std::size_t t = 0; t < n; ++t) out.values(d, t) = back[t];
  }
  out.labels.assign(n, 0);
  return out;
}

/// Scales the sample at index by factor; near-zero samples are offset by
/// factor * per-dimension RMS instead (multiplying zero would be a no-op).
/// All dimensions are modified; label[index] becomes 1.
inline TimeSeries inject_point_anomaly(const TimeSeries& series, std::size_t index,
                                       double factor) {
  if (index >= series.length())
    fail(ErrorKind::IndexOutOfRange,
         "index " + std::to_string(index) + " vs T " + std::to_string(series.length()));
  TimeSeries out = series;
  out.labels = detail::labels_or_zeros(series);
  for (std::size_t d = 0; d < series.dims(); ++d) {
    double rms = detail::row_rms(series.values.row(d));
    if (rms < 1e-300) rms = 1.0;
    double x = out.values(d, index);
    if (std::abs(x) < 1e-6 * rms) {
      out.values(d, index) = x + factor * rms;
    } else {
      out.values(d, index) = x * factor;
    }
  }
  out.labels[index] = 1;
  return out;
}

/// Copies donor content at span_b over span_a; span_a is labeled anomalous.
inline TimeSeries inject_exchange(const TimeSeries& series, Span span_a, Span span_b,
                                  const TimeSeries& donor) {
  if (span_a.len != span_b.len)
    fail(ErrorKind::SpanLengthMismatch, "span lengths " + std::to_string(span_a.len) + " vs " +
                                            std::to_string(span_b.len));
  if (donor.dims() != series.dims())
    fail(ErrorKind::DimensionMismatch, "donor dims " + std::to_string(donor.dims()) + " vs " +
                                           std::to_string(series.dims()));
  detail::check_span(span_a, series.length(), "target");
  if (span_b.end() > donor.length()) {
    if (donor.length() < span_b.len)
      fail(ErrorKind::SpanLengthMismatch, "donor shorter than the exchanged span");
    detail::check_span(span_b, donor.length(), "donor");
  }
  TimeSeries out = series;
  out.labels = detail::labels_or_zeros(series);
  for (std::size_t d = 0; d < series.dims(); ++d)
    for (std::size_t i = 0; i < span_a.len; ++i)
      out.values(d, span_a.start + i) = donor.values(d, span_b.start + i);
  for (std::size_t i = span_a.start; i < span_a.end(); ++i) out.labels[i] = 1;
  return out;
}

/// Blends b into a within the span: out = alpha * a + (1 - alpha) * b there,
/// a elsewhere. alpha = 1 is the identity and leaves labels untouched.
inline TimeSeries inject_mixup(const TimeSeries& a, const TimeSeries& b, double alpha,
                               Span span) {
  if (a.dims() != b.dims())
    fail(ErrorKind::DimensionMismatch,
         "dims " + std::to_string(a.dims()) + " vs " + std::to_string(b.dims()));
  detail::check_span(span, a.length(), "target");
  detail::check_span(span, b.length(), "donor");
  TimeSeries out = a;
  if (alpha == 1.0) return out;
  out.labels = detail::labels_or_zeros(a);
  for (std::size_t d = 0; d < a.dims(); ++d)
    for (std::size_t i = span.start; i < span.end(); ++i)
      out.values(d, i) = alpha * a.values(d, i) + (1.0 - alpha) * b.values(d, i);
  for (std::size_t i = span.start; i < span.end(); ++i) out.labels[i] = 1;
  return out;
}

namespace detail {

inline std::size_t dominant_bin(const SpectralVector& spec) {
  const std::size_t n = spec.n;
  std::size_t best = 1;
  double best_mag = -1.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    double mag = spec.re(k) * spec.re(k) + spec.im(k) * spec.im(k);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  return best;
}

// Writes (re, im) to bin k and the conjugate to bin n-k. Self-conjugate bins
// (DC, Nyquist) keep a zero imaginary part.
inline void set_bin_pair(SpectralVector& spec, std::size_t k, double re, double im) {
  const std::size_t n = spec.n;
  const std::size_t mirror = (n - k) % n;
  if (k == mirror) {
    spec.re(k) = re;
    spec.im(k) = 0.0;
    return;
  }
  spec.re(k) = re;
  spec.im(k) = im;
  spec.re(mirror) = re;
  spec.im(mirror) = -im;
}

inline void apply_bin_op(SpectralVector& spec, FreqAnomalyMode mode, double magnitude) {
  const std::size_t n = spec.n;
  const std::size_t k = dominant_bin(spec);
  switch (mode) {
    case FreqAnomalyMode::ScaleBin: {
      double f = 1.0 + magnitude;
      set_bin_pair(spec, k, spec.re(k) * f, spec.im(k) * f);
      break;
    }
    case FreqAnomalyMode::ZeroBin: {
      set_bin_pair(spec, k, 0.0, 0.0);
      break;
    }
    case FreqAnomalyMode::ShiftPeak: {
      const std::size_t max_k = n / 2;
      long shift = static_cast<long>(std::ceil(magnitude));
      long target = std::clamp(static_cast<long>(k) + shift, 1L, static_cast<long>(max_k));
      if (target == static_cast<long>(k))
        target = std::clamp(static_cast<long>(k) - shift, 1L, static_cast<long>(max_k));
      double re = spec.re(k);
      double im = spec.im(k);
      set_bin_pair(spec, k, 0.0, 0.0);
      std::size_t kt = static_cast<std::size_t>(target);
      set_bin_pair(spec, kt, spec.re(kt) + re, spec.im(kt) + im);
      break;
    }
  }
}

}  // namespace detail

/// Rewrites the span through its spectrum: the dominant non-DC bin is scaled,
/// zeroed, or moved by ceil(magnitude) bins (a manufactured seasonality
/// change). The span is labeled anomalous.
inline TimeSeries inject_freq_anomaly(const TimeSeries& series, Span span, FreqAnomalyMode mode,
                                      double magnitude) {
  detail::check_span(span, series.length(), "target");
  if (span.len < 4)
    fail(ErrorKind::SpanTooShort,
         "span length " + std::to_string(span.len) + " < 4 cannot carry a seasonality change");
  TimeSeries out = series;
  out.labels = detail::labels_or_zeros(series);
  for (std::size_t d = 0; d < series.dims(); ++d) {
    std::vector<double> window(span.len);
    for (std::size_t i = 0; i < span.len; ++i) window[i] = series.values(d, span.start + i);
    SpectralVector spec = dft_interleaved(window);
    detail::apply_bin_op(spec, mode, magnitude);
    std::vector<double> back = idft(spec, 1e-6);
    for (std::size_t i = 0; i < span.len; ++i) out.values(d, span.start + i) = back[i];
  }
  for (std::size_t i = span.start; i < span.end(); ++i) out.labels[i] = 1;
  return out;
}

/// Adds the ramp 0, slope, 2*slope, ... across the span on selected
/// dimensions. slope = 0 leaves values and labels untouched.
inline TimeSeries inject_slow_slope(const TimeSeries& series, Span span, double slope,
                                    const std::vector<std::size_t>& dims) {
  detail::check_span(span, series.length(), "target");
  for (std::size_t d : dims)
    if (d >= series.dims())
      fail(ErrorKind::DimensionMismatch, "dimension " + std::to_string(d) + " out of range");
  TimeSeries out = series;
  if (slope == 0.0) return out;
  out.labels = detail::labels_or_zeros(series);
  for (std::size_t d : dims)
    for (std::size_t i = 0; i < span.len; ++i)
      out.values(d, span.start + i) += slope * static_cast<double>(i);
  for (std::size_t i = span.start; i < span.end(); ++i) out.labels[i] = 1;
  return out;
}

namespace detail {

inline TimeSeries window_as_series(const Matrix& values) {
  TimeSeries s;
  s.id = "window";
  s.values = values;
  return s;
}

// Draws an injection over the suspect region of the pair and applies it.
// Returns the new full-window contents.
inline Matrix draw_injection(const WindowPair& pair, const std::vector<WindowPair>& pool,
                             std::size_t self_index, const AugmentConfig& cfg, Rng& rng) {
  const std::size_t ctx = pair.context_len();
  const std::size_t sus = pair.suspect_len();
  const std::size_t full = pair.full.cols();
  std::vector<InjectionKind> methods(cfg.methods.begin(), cfg.methods.end());
  InjectionKind kind = methods[static_cast<std::size_t>(rng.below(methods.size()))];
  TimeSeries window = window_as_series(pair.full);

  auto draw_span = [&](std::size_t min_len) {
    std::size_t lo = std::max<std::size_t>(min_len, std::max<std::size_t>(1, sus / 4));
    std::size_t len = lo + rng.below(sus - lo + 1);
    std::size_t start = ctx + rng.below(sus - len + 1);
    return Span{start, len};
  };
  auto draw_factor = [&] {
    double f = rng.uniform(2.0, 6.0);
    return rng.coin() ? f : -f;
  };
  auto other_index = [&] {
    if (pool.size() <= 1) return self_index;
    std::size_t j = rng.below(pool.size() - 1);
    return j >= self_index ? j + 1 : j;
  };

  switch (kind) {
    case InjectionKind::PointScale: {
      std::size_t index = ctx + rng.below(sus);
      return inject_point_anomaly(window, index, draw_factor()).values;
    }
    case InjectionKind::Exchange: {
      Span span = draw_span(1);
      const WindowPair& donor = pool[other_index()];
      std::size_t donor_start = rng.below(full - span.len + 1);
      TimeSeries donor_series = window_as_series(donor.full);
      return inject_exchange(window, span, Span{donor_start, span.len}, donor_series).values;
    }
    case InjectionKind::Mixup: {
      Span span = draw_span(1);
      const WindowPair& donor = pool[other_index()];
      double alpha = rng.uniform(0.05, 0.8);
      return inject_mixup(window, window_as_series(donor.full), alpha, span).values;
    }
    case InjectionKind::FreqAnomaly: {
      if (sus < 4) break;  // cannot fit a spectrum; fall through to point scale
      Span span = draw_span(4);
      FreqAnomalyMode mode = static_cast<FreqAnomalyMode>(rng.below(3));
      double magnitude = 0.0;
      if (mode == FreqAnomalyMode::ScaleBin) magnitude = rng.uniform(1.0, 4.0);
      if (mode == FreqAnomalyMode::ShiftPeak) {
        double delta = static_cast<double>(1 + rng.below(3));
        magnitude = rng.coin() ? delta : -delta;
      }
      return inject_freq_anomaly(window, span, mode, magnitude).values;
    }
    case InjectionKind::SlowSlope: {
      Span span = draw_span(2);
      double sigma = 0.0;
      for (std::size_t d = 0; d < window.dims(); ++d) {
        auto row = window.values.row(d);
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= static_cast<double>(row.size());
        double var = 0.0;
        for (double v : row) var += (v - mean) * (v - mean);
        sigma += std::sqrt(var / static_cast<double>(row.size()));
      }
      sigma /= static_cast<double>(window.dims());
      if (sigma < 1e-12) sigma = 1.0;
      double reach = rng.uniform(2.0, 6.0) * (rng.coin() ? 1.0 : -1.0);
      double slope = reach * sigma / static_cast<double>(std::max<std::size_t>(1, span.len - 1));
      std::vector<std::size_t> dims(window.dims());
      for (std::size_t d = 0; d < dims.size(); ++d) dims[d] = d;
      return inject_slow_slope(window, span, slope, dims).values;
    }
  }
  // fallback: guaranteed-visible point scale
  std::size_t index = ctx + rng.below(sus);
  return inject_point_anomaly(window, index, 5.0).values;
}

}  // namespace detail

/// Originals plus ceil(normal_ratio * n) smoothed/jittered normal pairs and
/// ceil(anomaly_ratio * n) injected anomaly pairs. Injections stay inside
/// suspect spans so contexts remain clean. Deterministic in the seed.
inline std::vector<WindowPair> build_augmented_set(const std::vector<WindowPair>& pairs,
                                                   const AugmentConfig& cfg, RngSeed seed) {
  cfg.validate();
  std::vector<WindowPair> out = pairs;
  if (pairs.empty()) return out;
  const std::size_t n = pairs.size();
  const std::size_t n_normal =
      static_cast<std::size_t>(std::ceil(cfg.normal_ratio * static_cast<double>(n)));
  const std::size_t n_anomaly =
      static_cast<std::size_t>(std::ceil(cfg.anomaly_ratio * static_cast<double>(n)));

  std::vector<std::size_t> normal_sources;
  for (std::size_t i = 0; i < n; ++i)
    if (pairs[i].label == 0) normal_sources.push_back(i);

  Rng root(seed);
  std::uint64_t base = root.next_u64();

  for (std::size_t i = 0; i < n_normal && !normal_sources.empty(); ++i) {
    Rng rng = Rng::derived(base, i);
    const WindowPair& src = pairs[normal_sources[rng.below(normal_sources.size())]];
    TimeSeries window = detail::window_as_series(src.full);
    Matrix full;
    if (rng.coin()) {
      full = smooth_normal(window, cfg.smooth_lambda).values;
    } else {
      full = augment_normal_freq(window, cfg.freq_perturb_scale, RngSeed{rng.next_u64()}).values;
    }
    out.push_back(WindowPair::make(std::move(full), src.context_len(), 0, src.start,
                                   src.source_id + "/normal_aug"));
  }

  for (std::size_t i = 0; i < n_anomaly; ++i) {
    Rng rng = Rng::derived(base, (1ULL << 32) + i);
    std::size_t src_index =
        normal_sources.empty()
            ? static_cast<std::size_t>(rng.below(n))
            : normal_sources[rng.below(normal_sources.size())];
    const WindowPair& src = pairs[src_index];
    Matrix full = detail::draw_injection(src, pairs, src_index, cfg, rng);
    bool changed = !(full == src.full);
    if (!changed) {
      std::size_t index = src.context_len() + rng.below(src.suspect_len());
      full = inject_point_anomaly(detail::window_as_series(src.full), index, 5.0).values;
    }
    out.push_back(WindowPair::make(std::move(full), src.context_len(), 1, src.start,
                                   src.source_id + "/anomaly_aug"));
  }
  return out;
}

}  // namespace tfd
