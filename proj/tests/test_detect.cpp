#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tfd/core.hpp"
#include "tfd/detect.hpp"
#include "tfd/nn/model.hpp"

using namespace tfd;

namespace {

TimeSeries series_of(std::vector<double> values, std::vector<std::uint8_t> labels = {}) {
  TimeSeries s;
  s.id = "s";
  s.values = Matrix::from_rows({values});
  s.labels = std::move(labels);
  return s;
}

nn::ModelConfig small_config() {
  nn::TcnConfig tcn;
  tcn.in_channels = 1;
  tcn.hidden_channels = 2;
  tcn.num_blocks = 1;
  tcn.kernel_size = 2;
  tcn.embedding_dim = 2;
  nn::ModelConfig cfg;
  cfg.tcn = {tcn, tcn, tcn, tcn};
  return cfg;
}

}  // namespace

TEST_CASE("split_windows produces T - full + 1 pairs at stride 1") {
  std::vector<double> v(10);
  for (std::size_t t = 0; t < 10; ++t) v[t] = static_cast<double>(t);
  WindowSpec spec{4, 2, 1};
  auto pairs = split_windows(series_of(v), spec);
  REQUIRE(pairs.size() == 5);
  // enumeration oracle: count valid starts directly
  std::size_t count = 0;
  for (std::size_t s = 0; s + spec.full_len() <= 10; ++s) ++count;
  REQUIRE(pairs.size() == count);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].start == i);
    CHECK(pairs[i].full(0, 0) == static_cast<double>(i));
    CHECK(pairs[i].context.cols() == 4);
    CHECK(pairs[i].label == 0);
  }
}

TEST_CASE("split_windows honors the stride") {
  std::vector<double> v(12, 0.0);
  WindowSpec spec{3, 2, 3};
  auto pairs = split_windows(series_of(v), spec);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].start == 0);
  CHECK(pairs[1].start == 3);
  CHECK(pairs[2].start == 6);
}

TEST_CASE("split_windows labels pairs from suspect-span truth") {
  std::vector<double> v(10, 1.0);
  std::vector<std::uint8_t> labels(10, 0);
  labels[5] = 1;
  WindowSpec spec{4, 2, 1};
  auto pairs = split_windows(series_of(v, labels), spec);
  REQUIRE(pairs.size() == 5);
  // exhaustive span enumeration oracle
  for (const auto& p : pairs) {
    std::uint8_t want = 0;
    for (std::size_t t = p.start + spec.context_len; t < p.start + spec.full_len(); ++t)
      if (labels[t]) want = 1;
    CHECK(p.label == want);
  }
  CHECK(pairs[0].label == 1);  // suspect {4,5}
  CHECK(pairs[1].label == 1);  // suspect {5,6}
  CHECK(pairs[2].label == 0);  // suspect {6,7}
}

TEST_CASE("split_windows rejects series shorter than the window") {
  WindowSpec spec{4, 2, 1};
  try {
    split_windows(series_of({1, 2, 3}), spec);
    FAIL("expected SeriesShorterThanWindow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SeriesShorterThanWindow);
  }
}

TEST_CASE("zero-parameter model scores every window 0.5") {
  auto cfg = small_config();
  auto params = nn::ModelParams::init(cfg, RngSeed{1});
  for (nn::Tensor* t : params.parameters()) t->data.assign(t->numel(), 0.0);
  Rng rng(RngSeed{2});
  std::vector<double> v(20);
  for (auto& x : v) x = rng.uniform(-1, 1);
  WindowSpec spec{6, 3, 1};
  auto scores = score_series(params, series_of(v), spec, 10.0);
  REQUIRE(scores.size() == 12);
  for (const auto& w : scores) CHECK(w.score == 0.5);
}

TEST_CASE("constant series yields identical scores everywhere") {
  auto cfg = small_config();
  auto params = nn::ModelParams::init(cfg, RngSeed{3});
  std::vector<double> v(24, 7.5);
  WindowSpec spec{6, 3, 1};
  auto scores = score_series(params, series_of(v), spec, 10.0);
  for (const auto& w : scores) CHECK(w.score == scores.front().score);
}

TEST_CASE("score_series is reproducible bit for bit") {
  auto cfg = small_config();
  auto params = nn::ModelParams::init(cfg, RngSeed{4});
  Rng rng(RngSeed{5});
  std::vector<double> v(30);
  for (auto& x : v) x = rng.normal();
  WindowSpec spec{5, 2, 2};
  auto a = score_series(params, series_of(v), spec, 100.0);
  auto b = score_series(params, series_of(v), spec, 100.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].start == b[i].start);
    CHECK(a[i].score == b[i].score);
  }
}

TEST_CASE("vote_point_labels: majority and tie rules") {
  WindowSpec spec{1, 3, 1};
  // T = 7; windows at starts 0..3 with suspect spans [1,4),[2,5),[3,6),[4,7)
  // point 3 is covered by windows 0, 1, 2
  std::vector<WindowScore> scores = {{0, 0.9}, {1, 0.9}, {2, 0.1}, {3, 0.1}};
  auto labels = vote_point_labels(scores, 0.5, spec, 7);
  REQUIRE(labels.size() == 7);
  CHECK(labels[3] == 1);  // flagged by 2 of 3 covering windows
  CHECK(labels[0] == 0);  // never covered (context-only prefix)

  // point 5 is covered by windows 2 and 3, neither flagged
  CHECK(labels[5] == 0);

  // tie: point 4 covered by windows 1,2,3 -> flagged by 1 of 3 -> 0
  CHECK(labels[4] == 0);

  std::vector<WindowScore> tie = {{0, 0.9}, {1, 0.1}};
  // point 2 covered by spans [1,4) and [2,5): flagged 1 of 2 -> strict
  // majority fails
  auto tie_labels = vote_point_labels(tie, 0.5, spec, 5);
  CHECK(tie_labels[2] == 0);
  CHECK(tie_labels[1] == 1);  // covered only by window 0, flagged 1 of 1
}

TEST_CASE("vote_point_labels: nothing flagged means all points normal") {
  WindowSpec spec{2, 2, 1};
  std::vector<WindowScore> scores = {{0, 0.2}, {1, 0.3}, {2, 0.1}};
  auto labels = vote_point_labels(scores, 0.5, spec, 8);
  for (auto v : labels) CHECK(v == 0);
}

TEST_CASE("coverage bookkeeping: total coverage equals windows x suspect_len") {
  Rng rng(RngSeed{6});
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t T = 20 + rng.below(30);
    WindowSpec spec{1 + rng.below(5), 1 + rng.below(4), 1};
    if (T < spec.full_len()) continue;
    std::size_t n_windows = T - spec.full_len() + 1;
    std::vector<WindowScore> scores;
    for (std::size_t s = 0; s < n_windows; ++s) scores.push_back({s, 1.0});
    // every point flagged by all covering windows: coverage = flag count
    auto labels = vote_point_labels(scores, 0.5, spec, T);
    std::size_t covered_points = 0;
    for (auto v : labels) covered_points += v;
    // with threshold below all scores, every covered point is flagged
    // unanimously; total coverage = windows * suspect_len
    std::size_t total_coverage = 0;
    for (std::size_t t = 0; t < T; ++t) {
      std::size_t c = 0;
      for (const auto& w : scores) {
        std::size_t begin = w.start + spec.context_len;
        if (t >= begin && t < begin + spec.suspect_len) ++c;
      }
      total_coverage += c;
      if (c > 0) CHECK(labels[t] == 1);
    }
    CHECK(total_coverage == n_windows * spec.suspect_len);
    (void)covered_points;
  }
}

TEST_CASE("monotonicity: lowering the threshold only grows the anomaly set") {
  Rng rng(RngSeed{7});
  WindowSpec spec{3, 2, 1};
  const std::size_t T = 40;
  std::vector<WindowScore> scores;
  for (std::size_t s = 0; s + spec.full_len() <= T; ++s)
    scores.push_back({s, rng.uniform()});
  auto high = vote_point_labels(scores, 0.7, spec, T);
  auto low = vote_point_labels(scores, 0.3, spec, T);
  for (std::size_t t = 0; t < T; ++t)
    if (high[t]) CHECK(low[t] == 1);
}
