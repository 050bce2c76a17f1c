#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tfd/augment.hpp"
#include "tfd/core.hpp"

namespace tfd {

struct SineComponent {
  double amp_sin = 0.0;  // A
  double amp_cos = 0.0;  // B
  double omega = 0.0;    // cycles per sample, (0, 0.5]
};

/// Slope schedule entry: this slope applies from `start` until the next
/// segment begins.
struct TrendSegment {
  std::size_t start = 0;
  double slope = 0.0;
};

struct StructuralConfig {
  std::vector<SineComponent> components;
  std::vector<TrendSegment> trend;
  double noise_std = 0.0;
  std::size_t length = 0;
  std::size_t dims = 1;

  void validate() const {
    if (length == 0 || dims == 0) fail(ErrorKind::InvalidConfig, "length and dims must be positive");
    if (noise_std < 0.0 || !std::isfinite(noise_std))
      fail(ErrorKind::InvalidConfig, "noise_std must be finite and nonnegative");
    for (const auto& c : components)
      if (!(c.omega > 0.0) || c.omega > 0.5)
        fail(ErrorKind::InvalidOmega,
             "omega " + std::to_string(c.omega) + " outside (0, 0.5]");
  }
};

namespace detail {

inline std::vector<double> trend_path(const std::vector<TrendSegment>& segments,
                                      std::size_t length) {
  std::vector<TrendSegment> sorted = segments;
  std::sort(sorted.begin(), sorted.end(),
            [](const TrendSegment& a, const TrendSegment& b) { return a.start < b.start; });
  std::vector<double> tau(length, 0.0);
  double level = 0.0;
  double slope = 0.0;
  std::size_t seg = 0;
  for (std::size_t t = 0; t < length; ++t) {
    while (seg < sorted.size() && sorted[seg].start <= t) slope = sorted[seg++].slope;
    if (t > 0) level += slope;
    tau[t] = level;
  }
  return tau;
}

}  // namespace detail

/// x_t = sum_n [A_n sin(2 pi w_n t) + B_n cos(2 pi w_n t)] + tau(t) + noise.
/// All dimensions share the deterministic structure; noise is independent
/// per dimension.
inline TimeSeries generate_structural(const StructuralConfig& cfg, RngSeed seed) {
  cfg.validate();
  constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
  Rng rng(seed);
  TimeSeries out;
  out.id = "structural";
  out.values = Matrix(cfg.dims, cfg.length);
  out.labels.assign(cfg.length, 0);
  std::vector<double> tau = detail::trend_path(cfg.trend, cfg.length);
  std::vector<double> base(cfg.length, 0.0);
  for (std::size_t t = 0; t < cfg.length; ++t) {
    double v = tau[t];
    for (const auto& c : cfg.components) {
      double phase = kTwoPi * c.omega * static_cast<double>(t);
      v += c.amp_sin * std::sin(phase) + c.amp_cos * std::cos(phase);
    }
    base[t] = v;
  }
  for (std::size_t d = 0; d < cfg.dims; ++d)
    for (std::size_t t = 0; t < cfg.length; ++t)
      out.values(d, t) = base[t] + (cfg.noise_std > 0.0 ? rng.normal(0.0, cfg.noise_std) : 0.0);
  return out;
}

enum class AnomalyKind {
  GlobalPoint,
  ContextPoint,
  Shapelet,
  Seasonal,
  Trend,
};

inline const char* anomaly_kind_name(AnomalyKind k) {
  switch (k) {
    case AnomalyKind::GlobalPoint: return "global_point";
    case AnomalyKind::ContextPoint: return "context_point";
    case AnomalyKind::Shapelet: return "shapelet";
    case AnomalyKind::Seasonal: return "seasonal";
    case AnomalyKind::Trend: return "trend";
  }
  return "?";
}

inline AnomalyKind anomaly_kind_from_name(const std::string& name) {
  for (AnomalyKind k : {AnomalyKind::GlobalPoint, AnomalyKind::ContextPoint,
                        AnomalyKind::Shapelet, AnomalyKind::Seasonal, AnomalyKind::Trend})
    if (name == anomaly_kind_name(k)) return k;
  fail(ErrorKind::UnknownKind, "anomaly kind '" + name + "'");
}

struct TaxonomyParams {
  double magnitude = 2.0;       // global point: target multiple of the global absmax
  double context_sigma = 3.5;   // context point: deviation in local stds
  double seasonal_shift = 2.0;  // seasonal: peak shift in bins
  double trend_reach = 3.0;     // trend: ramp reach in series stds
  std::size_t shapelet_period = 0;  // 0 = span length / 4
};

namespace detail {

struct RowStats {
  double min = 0.0, max = 0.0, absmax = 0.0, mean = 0.0, stddev = 0.0;
};

inline RowStats row_stats(std::span<const double> row) {
  RowStats s;
  s.min = row[0];
  s.max = row[0];
  double acc = 0.0;
  for (double v : row) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    acc += v;
  }
  s.mean = acc / static_cast<double>(row.size());
  double var = 0.0;
  for (double v : row) var += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(row.size()));
  s.absmax = std::max(std::abs(s.min), std::abs(s.max));
  return s;
}

}  // namespace detail

/// Injects one taxonomy anomaly over the span (point kinds use span.start).
/// Point kinds: global points leave the clean range entirely; context points
/// stay inside it but sit >= context_sigma local stds from the local mean.
/// Pattern kinds: shapelet swaps the waveform at matched mean/variance,
/// seasonal shifts the dominant frequency, trend adds a slow ramp.
inline TimeSeries inject_taxonomy(const TimeSeries& series, AnomalyKind kind, Span span,
                                  const TaxonomyParams& params, RngSeed seed) {
  detail::check_span(span, series.length(), "taxonomy");
  Rng rng(seed);
  switch (kind) {
    case AnomalyKind::GlobalPoint: {
      const std::size_t index = span.start;
      auto row = series.values.row(0);
      detail::RowStats st = detail::row_stats(row);
      double absmax = st.absmax > 0.0 ? st.absmax : 1.0;
      double rms = detail::row_rms(row);
      if (rms < 1e-300) rms = 1.0;
      double x = row[index];
      double factor = std::abs(x) < 1e-6 * rms ? params.magnitude * absmax / rms
                                               : params.magnitude * absmax / std::abs(x);
      return inject_point_anomaly(series, index, factor);
    }
    case AnomalyKind::ContextPoint: {
      const std::size_t index = span.start;
      TimeSeries out = series;
      out.labels = detail::labels_or_zeros(series);
      for (std::size_t d = 0; d < series.dims(); ++d) {
        auto row = series.values.row(d);
        detail::RowStats global = detail::row_stats(row);
        const std::size_t lo = index >= 16 ? index - 16 : 0;
        const std::size_t hi = std::min(series.length(), index + 17);
        std::vector<double> local(row.begin() + lo, row.begin() + hi);
        detail::RowStats st = detail::row_stats(local);
        double sigma = st.stddev;
        if (sigma < 1e-6) sigma = 1e-6;
        double up = st.mean + params.context_sigma * sigma;
        double down = st.mean - params.context_sigma * sigma;
        // pick the direction with more room inside the clean global range
        double candidate = (global.max - up) >= (down - global.min) ? up : down;
        out.values(d, index) = std::clamp(candidate, global.min, global.max);
      }
      out.labels[index] = 1;
      return out;
    }
    case AnomalyKind::Shapelet: {
      if (span.len < 4)
        fail(ErrorKind::SpanTooShort, "shapelet span must have length >= 4");
      TimeSeries out = series;
      out.labels = detail::labels_or_zeros(series);
      std::size_t period = params.shapelet_period ? params.shapelet_period : span.len / 4;
      period = std::max<std::size_t>(2, period & ~std::size_t{1});
      for (std::size_t d = 0; d < series.dims(); ++d) {
        std::vector<double> window(span.len);
        for (std::size_t i = 0; i < span.len; ++i) window[i] = series.values(d, span.start + i);
        detail::RowStats st = detail::row_stats(window);
        // square wave with the span's first two moments
        for (std::size_t i = 0; i < span.len; ++i) {
          bool high = (i % period) < period / 2;
          out.values(d, span.start + i) = st.mean + (high ? st.stddev : -st.stddev);
        }
      }
      for (std::size_t i = span.start; i < span.end(); ++i) out.labels[i] = 1;
      return out;
    }
    case AnomalyKind::Seasonal:
      return inject_freq_anomaly(series, span, FreqAnomalyMode::ShiftPeak,
                                 params.seasonal_shift);
    case AnomalyKind::Trend: {
      double sigma_sum = 0.0;
      for (std::size_t d = 0; d < series.dims(); ++d)
        sigma_sum += detail::row_stats(series.values.row(d)).stddev;
      double sigma = sigma_sum / static_cast<double>(series.dims());
      if (sigma < 1e-12) sigma = 1.0;
      double slope = params.trend_reach * sigma /
                     static_cast<double>(std::max<std::size_t>(1, span.len - 1));
      if (rng.coin()) slope = -slope;
      if (params.trend_reach == 0.0) slope = 0.0;
      std::vector<std::size_t> dims(series.dims());
      for (std::size_t d = 0; d < dims.size(); ++d) dims[d] = d;
      return inject_slow_slope(series, span, slope, dims);
    }
  }
  fail(ErrorKind::UnknownKind, "unhandled anomaly kind");
}

struct BenchmarkConfig {
  std::size_t n_series = 20;
  std::size_t length = 2000;
  std::size_t dims = 1;
  double anomaly_fraction = 0.02;
  double noise_std = 0.1;
  // Injections start at or after this index so every anomaly is coverable
  // by suspect windows at the default window geometry.
  std::size_t margin = 128;
  // Minimum clean run between injections; keeps the context windows of
  // anomalous suspects clean at the default context length.
  std::size_t min_gap = 128;
  std::vector<AnomalyKind> kinds_train;
  std::vector<AnomalyKind> kinds_val;
  std::vector<AnomalyKind> kinds_test;

  BenchmarkConfig() {
    std::vector<AnomalyKind> all = {AnomalyKind::GlobalPoint, AnomalyKind::ContextPoint,
                                    AnomalyKind::Shapelet, AnomalyKind::Seasonal,
                                    AnomalyKind::Trend};
    kinds_train = all;
    kinds_val = all;
    kinds_test = all;
  }

  void validate() const {
    if (n_series < 3)
      fail(ErrorKind::TooFewSeries,
           "need at least 3 series (one per split), got " + std::to_string(n_series));
    if (length == 0 || dims == 0) fail(ErrorKind::InvalidConfig, "length and dims must be positive");
    if (anomaly_fraction < 0.0 || anomaly_fraction >= 1.0)
      fail(ErrorKind::InvalidConfig, "anomaly_fraction must be in [0, 1)");
    if (margin >= length) fail(ErrorKind::InvalidConfig, "margin must be below the series length");
    if (anomaly_fraction > 0.0 &&
        (kinds_train.empty() || kinds_val.empty() || kinds_test.empty()))
      fail(ErrorKind::InvalidConfig, "every split needs at least one anomaly kind");
  }
};

struct Benchmark {
  std::vector<TimeSeries> train, val, test;
};

namespace detail {

inline TimeSeries synth_benchmark_series(const BenchmarkConfig& cfg, std::size_t index,
                                         const std::vector<AnomalyKind>& kinds, Rng rng) {
  StructuralConfig scfg;
  scfg.length = cfg.length;
  scfg.dims = cfg.dims;
  scfg.noise_std = cfg.noise_std;
  const double period = 12.0 + static_cast<double>(rng.below(13));  // 12..24 samples
  scfg.components.push_back({rng.uniform(0.8, 1.2), rng.uniform(-0.3, 0.3), 1.0 / period});
  if (rng.coin())
    scfg.components.push_back({rng.uniform(0.1, 0.3), 0.0, 2.0 / period});
  // one gentle slope per series; a mid-series slope change would be an
  // unlabeled trend anomaly
  scfg.trend.push_back({0, rng.uniform(-0.008, 0.008)});

  TimeSeries series = generate_structural(scfg, RngSeed{rng.next_u64()});
  series.id = "series_" + std::to_string(index);
  if (cfg.anomaly_fraction <= 0.0) return series;

  const std::size_t target =
      static_cast<std::size_t>(std::llround(cfg.anomaly_fraction * static_cast<double>(cfg.length)));
  std::size_t labeled = 0;
  std::size_t kind_cursor = rng.below(kinds.size());
  std::size_t attempts = 0;
  while (labeled < target && attempts < 200) {
    ++attempts;
    AnomalyKind kind = kinds[kind_cursor % kinds.size()];
    const bool point_kind =
        kind == AnomalyKind::GlobalPoint || kind == AnomalyKind::ContextPoint;
    std::size_t remaining = target - labeled;
    std::size_t len = 1;
    if (!point_kind) {
      len = 24 + rng.below(41);  // 24..64
      if (len > remaining) len = std::max<std::size_t>(4, remaining);
    }
    if (cfg.length < cfg.margin + len) break;
    std::size_t start = cfg.margin + rng.below(cfg.length - cfg.margin - len + 1);
    bool clear = true;
    std::size_t lo = start >= cfg.min_gap ? start - cfg.min_gap : 0;
    std::size_t hi = std::min(cfg.length, start + len + cfg.min_gap);
    for (std::size_t t = lo; t < hi; ++t) clear = clear && series.labels[t] == 0;
    if (!clear) continue;

    TaxonomyParams params;
    params.magnitude = rng.uniform(1.5, 3.0);
    params.context_sigma = rng.uniform(3.0, 4.5);
    params.seasonal_shift = static_cast<double>(1 + rng.below(3));
    params.trend_reach = rng.uniform(2.0, 4.0);
    series = inject_taxonomy(series, kind, Span{start, len}, params, RngSeed{rng.next_u64()});
    labeled += point_kind ? 1 : len;
    ++kind_cursor;
  }
  return series;
}

}  // namespace detail

/// Deterministic labeled dataset with a 30/20/50 train/val/test split. Each
/// split draws anomalies from its own kind list (identical by default).
inline Benchmark make_benchmark(const BenchmarkConfig& cfg, RngSeed seed) {
  cfg.validate();
  const std::size_t n_train = std::max<std::size_t>(1, (cfg.n_series * 3) / 10);
  const std::size_t n_val = std::max<std::size_t>(1, (cfg.n_series * 2) / 10);
  Rng root(seed);
  const std::uint64_t base = root.next_u64();
  Benchmark bench;
  for (std::size_t i = 0; i < cfg.n_series; ++i) {
    const std::vector<AnomalyKind>* kinds = &cfg.kinds_test;
    std::vector<TimeSeries>* split = &bench.test;
    if (i < n_train) {
      kinds = &cfg.kinds_train;
      split = &bench.train;
    } else if (i < n_train + n_val) {
      kinds = &cfg.kinds_val;
      split = &bench.val;
    }
    split->push_back(detail::synth_benchmark_series(cfg, i, *kinds, Rng::derived(base, i)));
  }
  return bench;
}

}  // namespace tfd
