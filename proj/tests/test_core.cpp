#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "tfd/core.hpp"

using namespace tfd;

namespace {

TimeSeries make_series(std::vector<double> values, std::vector<std::uint8_t> labels = {}) {
  TimeSeries s;
  s.id = "s";
  s.values = Matrix::from_rows({values});
  s.labels = std::move(labels);
  return s;
}

}  // namespace

TEST_CASE("validate_series accepts a well-formed series") {
  TimeSeries s = make_series({1, 2, 3, 4});
  REQUIRE_NOTHROW(validate_series(s));
  TimeSeries out = validate_series(s);
  CHECK(out.values == s.values);
  CHECK(out.id == "s");
}

TEST_CASE("validate_series rejects non-finite samples with position") {
  TimeSeries s = make_series({1, 2, std::numeric_limits<double>::quiet_NaN(), 4});
  try {
    validate_series(s);
    FAIL("expected NonFiniteSample");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteSample);
    CHECK(std::string(e.what()).find("index 2") != std::string::npos);
  }

  TimeSeries inf = make_series({1, std::numeric_limits<double>::infinity()});
  CHECK_THROWS_AS(validate_series(inf), Error);
}

TEST_CASE("validate_series rejects label length mismatch") {
  TimeSeries s = make_series({1, 2, 3, 4}, {0, 0, 1});
  try {
    validate_series(s);
    FAIL("expected LabelLengthMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LabelLengthMismatch);
  }
}

TEST_CASE("validate_series rejects empty series") {
  TimeSeries s;
  try {
    validate_series(s);
    FAIL("expected EmptySeries");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptySeries);
  }
}

TEST_CASE("WindowPair::make keeps context as the prefix of full") {
  Matrix full = Matrix::from_rows({{1, 2, 3, 4, 5, 6}, {7, 8, 9, 10, 11, 12}});
  WindowPair pair = WindowPair::make(full, 4, 1, 10, "src");
  REQUIRE(pair.context.cols() == 4);
  REQUIRE(pair.suspect_len() == 2);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 4; ++c) CHECK(pair.context(r, c) == pair.full(r, c));
  CHECK(pair.start == 10);
  CHECK(pair.source_id == "src");
}

TEST_CASE("Rng reproduces identical streams from identical seeds") {
  Rng a(RngSeed{1234});
  Rng b(RngSeed{1234});
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(a.next_u64() == b.next_u64());
  }
  Rng c(RngSeed{1234});
  Rng d(RngSeed{1234});
  for (int i = 0; i < 100; ++i) {
    REQUIRE(c.uniform() == d.uniform());
    REQUIRE(c.normal() == d.normal());
  }
}

TEST_CASE("Rng uniform stays in range and below honors bound") {
  Rng rng(RngSeed{7});
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(rng.below(17) < 17);
  }
}

TEST_CASE("Rng derived streams are order-independent") {
  Rng base(RngSeed{99});
  std::uint64_t root = base.next_u64();
  Rng s3 = Rng::derived(root, 3);
  Rng s1 = Rng::derived(root, 1);
  Rng s1_again = Rng::derived(root, 1);
  CHECK(s1.next_u64() == s1_again.next_u64());
  CHECK(s1.next_u64() != s3.next_u64());
}

TEST_CASE("Rng shuffle is a permutation and deterministic") {
  std::vector<int> items{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<int> copy = items;
  Rng a(RngSeed{5});
  Rng b(RngSeed{5});
  a.shuffle(items);
  b.shuffle(copy);
  CHECK(items == copy);
  std::vector<int> sorted = items;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("Matrix slice_cols copies the requested block") {
  Matrix m = Matrix::from_rows({{1, 2, 3, 4}, {5, 6, 7, 8}});
  Matrix s = m.slice_cols(1, 2);
  REQUIRE(s.rows() == 2);
  REQUIRE(s.cols() == 2);
  CHECK(s(0, 0) == 2);
  CHECK(s(1, 1) == 7);
}
