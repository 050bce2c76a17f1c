#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tfd {

enum class ErrorKind {
  NonFiniteSample,
  LabelLengthMismatch,
  EmptySeries,
  SeriesTooShort,
  NegativeLambda,
  EmptyWindow,
  AsymmetricSpectrum,
  IndexOutOfRange,
  SpanOutOfRange,
  SpanLengthMismatch,
  DimensionMismatch,
  SpanTooShort,
  NoMethodsEnabled,
  ChannelMismatch,
  NoForwardRecorded,
  EmptyTrainingSet,
  SeriesShorterThanWindow,
  LengthMismatch,
  NoLabeledValidation,
  InvalidOmega,
  UnknownKind,
  TooFewSeries,
  ParseError,
  NonMonotonicTimestamps,
  InvalidConfig,
  IoError,
};

inline const char* error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteSample: return "NonFiniteSample";
    case ErrorKind::LabelLengthMismatch: return "LabelLengthMismatch";
    case ErrorKind::EmptySeries: return "EmptySeries";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::NegativeLambda: return "NegativeLambda";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::AsymmetricSpectrum: return "AsymmetricSpectrum";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::SpanOutOfRange: return "SpanOutOfRange";
    case ErrorKind::SpanLengthMismatch: return "SpanLengthMismatch";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SpanTooShort: return "SpanTooShort";
    case ErrorKind::NoMethodsEnabled: return "NoMethodsEnabled";
    case ErrorKind::ChannelMismatch: return "ChannelMismatch";
    case ErrorKind::NoForwardRecorded: return "NoForwardRecorded";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::SeriesShorterThanWindow: return "SeriesShorterThanWindow";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NoLabeledValidation: return "NoLabeledValidation";
    case ErrorKind::InvalidOmega: return "InvalidOmega";
    case ErrorKind::UnknownKind: return "UnknownKind";
    case ErrorKind::TooFewSeries: return "TooFewSeries";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// All library failures surface as Error; kind() carries the category the
/// CLI prints and tests assert on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_name(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

/// Dense row-major matrix. Rows index dimensions, columns index time.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != m.cols_) fail(ErrorKind::DimensionMismatch, "ragged row lengths");
      for (std::size_t c = 0; c < m.cols_; ++c) m(r, c) = rows[r][c];
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Columns [start, start+len) as a new matrix.
  Matrix slice_cols(std::size_t start, std::size_t len) const {
    Matrix out(rows_, len);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < len; ++c) out(r, c) = (*this)(r, start + c);
    return out;
  }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Uniformly sampled multivariate series; labels are per-point {0,1} and
/// empty when the series is unlabeled. Time stamps are implicit indices.
struct TimeSeries {
  std::string id;
  Matrix values;  // D x T
  std::vector<std::uint8_t> labels;

  std::size_t dims() const { return values.rows(); }
  std::size_t length() const { return values.cols(); }
  bool has_labels() const { return !labels.empty(); }
};

/// Checks the TimeSeries invariants and passes the series through.
inline TimeSeries validate_series(TimeSeries series) {
  if (series.length() == 0 || series.dims() == 0)
    fail(ErrorKind::EmptySeries, "series '" + series.id + "' has no samples");
  for (std::size_t d = 0; d < series.dims(); ++d) {
    auto row = series.values.row(d);
    for (std::size_t t = 0; t < row.size(); ++t) {
      if (!std::isfinite(row[t]))
        fail(ErrorKind::NonFiniteSample,
             "series '" + series.id + "' dim " + std::to_string(d) + " index " + std::to_string(t));
    }
  }
  if (series.has_labels() && series.labels.size() != series.length())
    fail(ErrorKind::LabelLengthMismatch,
         "labels length " + std::to_string(series.labels.size()) + " vs T " +
             std::to_string(series.length()));
  return series;
}

/// Trend + residual components; trend + residual reconstructs the input.
struct DecomposedSeries {
  Matrix trend;
  Matrix residual;
  double lambda = 0.0;
};

struct WindowSpec {
  std::size_t context_len = 96;
  std::size_t suspect_len = 24;
  std::size_t stride = 1;

  std::size_t full_len() const { return context_len + suspect_len; }

  void validate() const {
    if (context_len == 0 || suspect_len == 0 || stride == 0)
      fail(ErrorKind::InvalidConfig, "window lengths and stride must be positive");
  }

  bool operator==(const WindowSpec&) const = default;
};

/// A full window with its context prefix. The suspect span is the suffix of
/// length full - context; label = 1 when that span contains an anomaly.
struct WindowPair {
  Matrix full;     // D x full_len
  Matrix context;  // D x context_len, first columns of full
  std::uint8_t label = 0;
  std::size_t start = 0;
  std::string source_id;

  std::size_t context_len() const { return context.cols(); }
  std::size_t suspect_len() const { return full.cols() - context.cols(); }

  static WindowPair make(Matrix full, std::size_t context_len, std::uint8_t label,
                         std::size_t start, std::string source_id) {
    WindowPair pair;
    pair.context = full.slice_cols(0, context_len);
    pair.full = std::move(full);
    pair.label = label;
    pair.start = start;
    pair.source_id = std::move(source_id);
    return pair;
  }
};

/// Half-open index span [start, start + len).
struct Span {
  std::size_t start = 0;
  std::size_t len = 0;
  std::size_t end() const { return start + len; }
};

struct RngSeed {
  std::uint64_t value = 0;

  bool operator==(const RngSeed&) const = default;
};

/// Deterministic random source. The engine is std::mt19937_64; the variate
/// transforms are pinned here because the standard leaves distribution
/// sequences implementation-defined and pipelines must reproduce
/// bit-for-bit.
class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(seed.value) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Box-Muller, fixed two-draw consumption per variate.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double mag = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * mag * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    // multiply-shift; bias is < 2^-64 per draw, irrelevant at our scales
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool coin() { return (next_u64() & 1u) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<std::size_t>(below(items.size()))];
  }

  /// Child stream seeded from (base, stream); order-independent, so derived
  /// generators may run in parallel per index.
  static Rng derived(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    s ^= s >> 30;
    s *= 0xbf58476d1ce4e5b9ULL;
    s ^= s >> 27;
    s *= 0x94d049bb133111ebULL;
    s ^= s >> 31;
    return Rng(RngSeed{s});
  }

  /// Convenience fork; consumes one engine draw.
  Rng fork(std::uint64_t stream = 0) { return derived(next_u64(), stream); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tfd
