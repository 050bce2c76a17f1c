#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "tfd/core.hpp"
#include "tfd/eval.hpp"

using namespace tfd;

namespace {

using Bits = std::vector<std::uint8_t>;

// Brute-force oracle: for every position inside a truth run of 1s, walk the
// run bounds independently and check whether any prediction hits it.
Bits adjust_oracle(const Bits& pred, const Bits& truth) {
  Bits out = pred;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (!truth[t]) continue;
    std::size_t lo = t;
    while (lo > 0 && truth[lo - 1]) --lo;
    std::size_t hi = t;
    while (hi + 1 < truth.size() && truth[hi + 1]) ++hi;
    bool hit = false;
    for (std::size_t u = lo; u <= hi; ++u) hit = hit || pred[u];
    out[t] = hit ? 1 : pred[t];
  }
  return out;
}

struct OracleCounts {
  long long tp = 0, fp = 0, fn = 0;
};

OracleCounts count_oracle(const Bits& pred, const Bits& truth) {
  OracleCounts c;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    c.tp += (pred[t] == 1 && truth[t] == 1);
    c.fp += (pred[t] == 1 && truth[t] == 0);
    c.fn += (pred[t] == 0 && truth[t] == 1);
  }
  return c;
}

Bits random_bits(std::size_t n, Rng& rng, double p_one) {
  Bits b(n);
  for (auto& v : b) v = rng.uniform() < p_one ? 1 : 0;
  return b;
}

}  // namespace

TEST_CASE("point_adjust credits a whole detected segment") {
  Bits truth{0, 1, 1, 1, 0};
  Bits pred{0, 0, 1, 0, 0};
  CHECK(point_adjust(pred, truth) == Bits{0, 1, 1, 1, 0});
}

TEST_CASE("point_adjust with empty truth leaves predictions alone") {
  Bits truth{0, 0, 0, 0};
  Bits pred{0, 1, 0, 1};
  CHECK(point_adjust(pred, truth) == pred);
}

TEST_CASE("point_adjust leaves undetected segments unchanged") {
  Bits truth{1, 1, 0, 1};
  Bits pred{0, 0, 0, 1};
  CHECK(point_adjust(pred, truth) == Bits{0, 0, 0, 1});
}

TEST_CASE("point_adjust matches the brute-force oracle") {
  Rng rng(RngSeed{1});
  for (int trial = 0; trial < 2000; ++trial) {
    std::size_t n = 1 + rng.below(32);
    Bits truth = random_bits(n, rng, 0.3);
    Bits pred = random_bits(n, rng, 0.25);
    REQUIRE(point_adjust(pred, truth) == adjust_oracle(pred, truth));
  }
}

TEST_CASE("point_adjust is idempotent") {
  Rng rng(RngSeed{2});
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = 1 + rng.below(24);
    Bits truth = random_bits(n, rng, 0.4);
    Bits pred = random_bits(n, rng, 0.2);
    Bits once = point_adjust(pred, truth);
    CHECK(point_adjust(once, truth) == once);
  }
}

TEST_CASE("point_adjust rejects length mismatch") {
  try {
    point_adjust(Bits{0, 1}, Bits{0, 1, 0});
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LengthMismatch);
  }
}

TEST_CASE("prf1 on a perfect prediction") {
  Bits both{0, 1, 1, 0};
  EvalReport r = prf1(both, both);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
  CHECK(r.tp == 2);
  CHECK(r.fp == 0);
  CHECK(r.fn == 0);
}

TEST_CASE("prf1 with no predictions scores zero recall") {
  EvalReport r = prf1(Bits{0, 0, 0}, Bits{0, 1, 1});
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
}

TEST_CASE("prf1 false positive on clean truth") {
  EvalReport r = prf1(Bits{1, 0}, Bits{0, 0});
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 1.0);  // nothing to find
  CHECK(r.f1 == 0.0);
}

TEST_CASE("prf1 both empty is a perfect degenerate case") {
  EvalReport r = prf1(Bits{0, 0}, Bits{0, 0});
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
}

TEST_CASE("point_adjust + prf1 agree with brute force on random pairs") {
  Rng rng(RngSeed{3});
  for (int trial = 0; trial < 3000; ++trial) {
    std::size_t n = 1 + rng.below(12);
    Bits truth = random_bits(n, rng, 0.35);
    Bits pred = random_bits(n, rng, 0.3);
    Bits adjusted = point_adjust(pred, truth);
    EvalReport got = prf1(adjusted, truth);
    OracleCounts want = count_oracle(adjust_oracle(pred, truth), truth);
    REQUIRE(got.tp == want.tp);
    REQUIRE(got.fp == want.fp);
    REQUIRE(got.fn == want.fn);
  }
}

TEST_CASE("adjusted recall never drops below raw recall") {
  Rng rng(RngSeed{4});
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = 2 + rng.below(20);
    Bits truth = random_bits(n, rng, 0.4);
    Bits pred = random_bits(n, rng, 0.3);
    double raw = prf1(pred, truth).recall;
    double adjusted = prf1(point_adjust(pred, truth), truth).recall;
    REQUIRE(adjusted >= raw);
  }
}

TEST_CASE("select_threshold separates a clean two-window case") {
  // windows: start 0 scored .1 (suspect {1,2}), start 1 scored .9 ({2,3});
  // the only anomaly (t = 3) is covered by the second window alone.
  WindowSpec spec{1, 2, 1};
  std::vector<std::vector<WindowScore>> scores{{{0, 0.1}, {1, 0.9}}};
  std::vector<Bits> truths{{0, 0, 0, 1, 0}};
  EvalReport r = select_threshold(scores, truths, spec);
  CHECK(r.f1 == 1.0);
  CHECK(r.threshold > 0.1);
  CHECK(r.threshold < 0.9);
}

TEST_CASE("select_threshold degenerate equal scores returns 0.5") {
  WindowSpec spec{1, 2, 1};
  std::vector<std::vector<WindowScore>> scores{{{0, 0.7}, {1, 0.7}, {2, 0.7}}};
  std::vector<Bits> truths{{0, 0, 1, 0, 0, 0}};
  EvalReport r = select_threshold(scores, truths, spec);
  CHECK(r.threshold == 0.5);
  // with every window flagged, every covered point is positive
  EvalReport check = r;
  CHECK(check.tp == 1);
}

TEST_CASE("select_threshold matches an exhaustive sweep oracle") {
  Rng rng(RngSeed{5});
  WindowSpec spec{2, 2, 1};
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t T = 16;
    std::vector<std::vector<WindowScore>> scores(2);
    std::vector<Bits> truths(2);
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t st = 0; st + spec.full_len() <= T; ++st)
        scores[s].push_back({st, 0.1 + 0.8 * rng.uniform()});
      truths[s] = random_bits(T, rng, 0.15);
    }
    bool any = false;
    for (const auto& t : truths)
      for (auto v : t) any = any || v;
    if (!any) continue;

    // independent oracle: same candidate set, recomputed end to end
    std::vector<double> all;
    for (const auto& sc : scores)
      for (const auto& w : sc) all.push_back(w.score);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    std::vector<double> candidates{0.5};
    for (std::size_t i = 0; i + 1 < all.size(); ++i)
      candidates.push_back(0.5 * (all[i] + all[i + 1]));
    std::sort(candidates.begin(), candidates.end());

    double best_f1 = -1.0, best_thr = 0.0;
    for (double thr : candidates) {
      OracleCounts pooled;
      for (std::size_t s = 0; s < 2; ++s) {
        Bits pred = vote_point_labels(scores[s], thr, spec, T);
        Bits adj = adjust_oracle(pred, truths[s]);
        OracleCounts c = count_oracle(adj, truths[s]);
        pooled.tp += c.tp;
        pooled.fp += c.fp;
        pooled.fn += c.fn;
      }
      double precision = (pooled.tp + pooled.fp == 0)
                             ? ((pooled.tp + pooled.fn == 0) ? 1.0 : 0.0)
                             : double(pooled.tp) / double(pooled.tp + pooled.fp);
      double recall = (pooled.tp + pooled.fn == 0) ? 1.0 : double(pooled.tp) / double(pooled.tp + pooled.fn);
      double f1 = (precision + recall > 0) ? 2 * precision * recall / (precision + recall) : 0.0;
      if (f1 >= best_f1) {
        best_f1 = f1;
        best_thr = thr;
      }
    }
    EvalReport got = select_threshold(scores, truths, spec);
    REQUIRE_THAT(got.f1, Catch::Matchers::WithinAbs(best_f1, 1e-12));
    REQUIRE_THAT(got.threshold, Catch::Matchers::WithinAbs(best_thr, 1e-12));
  }
}

TEST_CASE("select_threshold with no labeled anomalies is an error") {
  WindowSpec spec{1, 1, 1};
  std::vector<std::vector<WindowScore>> scores{{{0, 0.4}}};
  std::vector<Bits> truths{{0, 0}};
  try {
    select_threshold(scores, truths, spec);
    FAIL("expected NoLabeledValidation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoLabeledValidation);
  }
}
