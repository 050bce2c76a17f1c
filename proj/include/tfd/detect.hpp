#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfd/core.hpp"
#include "tfd/nn/model.hpp"
#include "tfd/parallel.hpp"

namespace tfd {

struct WindowScore {
  std::size_t start = 0;
  double score = 0.0;
};

/// Sliding-window scoring output for one series.
struct ScoreSeries {
  std::vector<WindowScore> window_scores;
  std::vector<std::uint8_t> point_labels;
  double threshold = 0.5;
};

/// Full windows at starts 0, stride, 2*stride, ... while they fit. A pair is
/// labeled 1 iff any source label inside its suspect span is 1.
inline std::vector<WindowPair> split_windows(const TimeSeries& series, const WindowSpec& spec) {
  spec.validate();
  const std::size_t full = spec.full_len();
  if (series.length() < full)
    fail(ErrorKind::SeriesShorterThanWindow,
         "series '" + series.id + "' length " + std::to_string(series.length()) +
             " < full window " + std::to_string(full));
  std::vector<WindowPair> pairs;
  for (std::size_t start = 0; start + full <= series.length(); start += spec.stride) {
    std::uint8_t label = 0;
    if (series.has_labels()) {
      for (std::size_t t = start + spec.context_len; t < start + full; ++t)
        if (series.labels[t]) label = 1;
    }
    pairs.push_back(WindowPair::make(series.values.slice_cols(start, full), spec.context_len,
                                     label, start, series.id));
  }
  return pairs;
}

/// model_score over every split window; windows are scored independently in
/// parallel, output order is by start offset.
inline std::vector<WindowScore> score_series(const nn::ModelParams& params,
                                             const TimeSeries& series, const WindowSpec& spec,
                                             double lambda) {
  std::vector<WindowPair> pairs = split_windows(series, spec);
  std::vector<WindowScore> scores(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    scores[i] = {pairs[i].start, nn::model_score(params, pairs[i], lambda)};
  });
  return scores;
}

/// Majority vote: a window is flagged iff score > threshold; a point is
/// anomalous iff strictly more than half of the suspect windows covering it
/// are flagged. Points covered by no suspect window stay 0.
inline std::vector<std::uint8_t> vote_point_labels(const std::vector<WindowScore>& scores,
                                                   double threshold, const WindowSpec& spec,
                                                   std::size_t length) {
  std::vector<std::uint32_t> covered(length, 0);
  std::vector<std::uint32_t> flagged(length, 0);
  for (const WindowScore& w : scores) {
    const bool flag = w.score > threshold;
    const std::size_t begin = w.start + spec.context_len;
    const std::size_t end = std::min(length, begin + spec.suspect_len);
    for (std::size_t t = begin; t < end; ++t) {
      ++covered[t];
      if (flag) ++flagged[t];
    }
  }
  std::vector<std::uint8_t> labels(length, 0);
  for (std::size_t t = 0; t < length; ++t)
    if (covered[t] > 0 && 2 * flagged[t] > covered[t]) labels[t] = 1;
  return labels;
}

}  // namespace tfd
