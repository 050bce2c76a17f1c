#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "tfd/core.hpp"
#include "tfd/spectral.hpp"

using namespace tfd;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Oracle: the definition evaluated verbatim with std::complex arithmetic.
std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      double angle = -2.0 * kPi * static_cast<double>(k) * static_cast<double>(j) /
                     static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> random_signal(std::size_t n, Rng& rng) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

}  // namespace

TEST_CASE("constant signal has only the DC bin") {
  const double c = 2.5;
  auto spec = dft_interleaved(std::vector<double>{c, c, c, c});
  CHECK_THAT(spec.re(0), Catch::Matchers::WithinAbs(4.0 * c, 1e-12));
  for (std::size_t k = 0; k < 4; ++k) {
    if (k > 0) CHECK_THAT(spec.re(k), Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(spec.im(k), Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("cosine at bin 1 lands in Re_1 and Re_7") {
  std::vector<double> x(8);
  for (std::size_t t = 0; t < 8; ++t) x[t] = std::cos(2.0 * kPi * static_cast<double>(t) / 8.0);
  auto spec = dft_interleaved(x);
  for (std::size_t k = 0; k < 8; ++k) {
    double want_re = (k == 1 || k == 7) ? 4.0 : 0.0;
    CHECK_THAT(spec.re(k), Catch::Matchers::WithinAbs(want_re, 1e-9));
    CHECK_THAT(spec.im(k), Catch::Matchers::WithinAbs(0.0, 1e-9));
  }
}

TEST_CASE("matches the naive definition for all N <= 64") {
  Rng rng(RngSeed{2024});
  for (std::size_t n = 1; n <= 64; ++n) {
    auto x = random_signal(n, rng);
    auto spec = dft_interleaved(x);
    auto want = naive_dft(x);
    for (std::size_t k = 0; k < n; ++k) {
      REQUIRE_THAT(spec.re(k), Catch::Matchers::WithinAbs(want[k].real(), 1e-9));
      REQUIRE_THAT(spec.im(k), Catch::Matchers::WithinAbs(want[k].imag(), 1e-9));
    }
  }
}

TEST_CASE("round trip idft(dft(x)) = x for N in 1..64") {
  Rng rng(RngSeed{5});
  for (std::size_t n = 1; n <= 64; ++n) {
    auto x = random_signal(n, rng);
    auto back = idft(dft_interleaved(x));
    REQUIRE(back.size() == n);
    for (std::size_t t = 0; t < n; ++t)
      REQUIRE_THAT(back[t], Catch::Matchers::WithinAbs(x[t], 1e-9));
  }
}

TEST_CASE("DC-only spectrum inverts to a constant") {
  SpectralVector spec;
  spec.n = 6;
  spec.data.assign(12, 0.0);
  spec.data[0] = 6.0 * 1.75;
  auto x = idft(spec);
  for (double v : x) CHECK_THAT(v, Catch::Matchers::WithinAbs(1.75, 1e-12));
}

TEST_CASE("asymmetric spectrum is rejected") {
  SpectralVector spec;
  spec.n = 8;
  spec.data.assign(16, 0.0);
  spec.im(1) = 1.0;
  spec.im(7) = -0.5;  // should be -1.0
  try {
    idft(spec);
    FAIL("expected AsymmetricSpectrum");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AsymmetricSpectrum);
  }
}

TEST_CASE("real input spectra satisfy conjugate symmetry") {
  Rng rng(RngSeed{17});
  for (std::size_t n : {5u, 8u, 13u, 32u}) {
    auto spec = dft_interleaved(random_signal(n, rng));
    CHECK(spec.symmetry_defect() < 1e-9);
  }
}

TEST_CASE("Parseval: time energy equals (1/N) spectral energy") {
  Rng rng(RngSeed{23});
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 1 + rng.below(128);
    auto x = random_signal(n, rng);
    auto spec = dft_interleaved(x);
    double time_energy = 0.0;
    for (double v : x) time_energy += v * v;
    double spec_energy = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      spec_energy += spec.re(k) * spec.re(k) + spec.im(k) * spec.im(k);
    spec_energy /= static_cast<double>(n);
    REQUIRE_THAT(spec_energy,
                 Catch::Matchers::WithinRel(time_energy, 1e-9) ||
                     Catch::Matchers::WithinAbs(time_energy, 1e-12));
  }
}

TEST_CASE("linearity of the transform") {
  Rng rng(RngSeed{29});
  const std::size_t n = 24;
  auto x = random_signal(n, rng);
  auto y = random_signal(n, rng);
  const double a = 2.25, b = -0.75;
  std::vector<double> mixed(n);
  for (std::size_t t = 0; t < n; ++t) mixed[t] = a * x[t] + b * y[t];
  auto sm = dft_interleaved(mixed);
  auto sx = dft_interleaved(x);
  auto sy = dft_interleaved(y);
  for (std::size_t i = 0; i < 2 * n; ++i)
    REQUIRE_THAT(sm.data[i],
                 Catch::Matchers::WithinAbs(a * sx.data[i] + b * sy.data[i], 1e-9));
}

TEST_CASE("empty window is rejected") {
  try {
    dft_interleaved(std::vector<double>{});
    FAIL("expected EmptyWindow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyWindow);
  }
}
