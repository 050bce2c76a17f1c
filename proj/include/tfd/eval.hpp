#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "tfd/core.hpp"
#include "tfd/detect.hpp"

namespace tfd {

/// Point-adjusted evaluation record.
struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double threshold = 0.5;
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
};

/// Credits whole truth segments: inside each maximal run of 1s in truth, if
/// pred hits at least one point, the prediction becomes 1 across the run.
/// Predictions outside truth segments are untouched.
inline std::vector<std::uint8_t> point_adjust(const std::vector<std::uint8_t>& pred,
                                              const std::vector<std::uint8_t>& truth) {
  if (pred.size() != truth.size())
    fail(ErrorKind::LengthMismatch, "pred length " + std::to_string(pred.size()) +
                                        " vs truth " + std::to_string(truth.size()));
  std::vector<std::uint8_t> adjusted = pred;
  std::size_t i = 0;
  while (i < truth.size()) {
    if (!truth[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < truth.size() && truth[j]) ++j;
    bool hit = false;
    for (std::size_t t = i; t < j && !hit; ++t) hit = pred[t] != 0;
    if (hit)
      for (std::size_t t = i; t < j; ++t) adjusted[t] = 1;
    i = j;
  }
  return adjusted;
}

namespace detail {

struct Counts {
  long long tp = 0, fp = 0, fn = 0;
};

inline Counts count_confusion(const std::vector<std::uint8_t>& pred,
                              const std::vector<std::uint8_t>& truth) {
  Counts c;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred[t] && truth[t]) ++c.tp;
    if (pred[t] && !truth[t]) ++c.fp;
    if (!pred[t] && truth[t]) ++c.fn;
  }
  return c;
}

// Degenerate-denominator conventions: with no predicted positives, precision
// is 1 when there are also no actual positives, else 0; with no actual
// positives, recall is 1. F1 is 0 when P + R = 0.
inline EvalReport report_from_counts(Counts c) {
  EvalReport r;
  r.tp = c.tp;
  r.fp = c.fp;
  r.fn = c.fn;
  if (c.tp + c.fp == 0) {
    r.precision = (c.tp + c.fn == 0) ? 1.0 : 0.0;
  } else {
    r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    r.recall = 1.0;
  } else {
    r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  r.f1 = (r.precision + r.recall > 0.0)
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

}  // namespace detail

/// Pointwise precision/recall/F1 of pred against truth. Callers evaluating
/// the point-adjusted metric pass pred through point_adjust first.
inline EvalReport prf1(const std::vector<std::uint8_t>& pred,
                       const std::vector<std::uint8_t>& truth) {
  if (pred.size() != truth.size())
    fail(ErrorKind::LengthMismatch, "pred length " + std::to_string(pred.size()) +
                                        " vs truth " + std::to_string(truth.size()));
  return detail::report_from_counts(detail::count_confusion(pred, truth));
}

/// Sweeps thresholds over every distinct window-score midpoint plus 0.5;
/// for each candidate, votes point labels per series, point-adjusts, pools
/// the confusion counts, and keeps the F1-maximizing threshold (ties go to
/// the larger threshold, fewer alarms).
inline EvalReport select_threshold(const std::vector<std::vector<WindowScore>>& scores_per_series,
                                   const std::vector<std::vector<std::uint8_t>>& truths,
                                   const WindowSpec& spec) {
  if (scores_per_series.size() != truths.size())
    fail(ErrorKind::LengthMismatch, "scores for " + std::to_string(scores_per_series.size()) +
                                        " series vs " + std::to_string(truths.size()) +
                                        " truth sequences");
  bool any_positive = false;
  for (const auto& truth : truths)
    for (std::uint8_t v : truth) any_positive = any_positive || v != 0;
  if (!any_positive)
    fail(ErrorKind::NoLabeledValidation, "validation truths contain no anomalous point");

  std::vector<double> distinct;
  for (const auto& scores : scores_per_series)
    for (const WindowScore& w : scores) distinct.push_back(w.score);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> candidates{0.5};
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
    candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  EvalReport best;
  bool first = true;
  for (double threshold : candidates) {
    detail::Counts pooled;
    for (std::size_t s = 0; s < scores_per_series.size(); ++s) {
      std::vector<std::uint8_t> pred =
          vote_point_labels(scores_per_series[s], threshold, spec, truths[s].size());
      std::vector<std::uint8_t> adjusted = point_adjust(pred, truths[s]);
      detail::Counts c = detail::count_confusion(adjusted, truths[s]);
      pooled.tp += c.tp;
      pooled.fp += c.fp;
      pooled.fn += c.fn;
    }
    EvalReport report = detail::report_from_counts(pooled);
    report.threshold = threshold;
    if (first || report.f1 >= best.f1) {
      best = report;
      first = false;
    }
  }
  return best;
}

}  // namespace tfd
