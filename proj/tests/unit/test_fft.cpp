#include <doctest.h>

#include <cmath>
#include <vector>

#include "cotdr/fft.hpp"
#include "cotdr/rng.hpp"

using namespace cotdr;

namespace {

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<cplx> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<cplx> v(n);
  for (auto& x : v) x = {rng.gaussian(), rng.gaussian()};
  return v;
}

} // namespace

TEST_SUITE_BEGIN("fft");

TEST_CASE("next_pow2") {
  CHECK(next_pow2(0) == 1);
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(2) == 2);
  CHECK(next_pow2(3) == 4);
  CHECK(next_pow2(1025) == 2048);
}

TEST_CASE("four-point transform, worked by hand") {
  // X[k] = sum_n x[n] e^{-i 2 pi k n / 4} for x = [1,2,3,4]:
  // X = [10, -2+2i, -2, -2-2i].
  std::vector<cplx> a = {1.0, 2.0, 3.0, 4.0};
  fft_pow2(a, false);
  CHECK(std::abs(a[0] - cplx(10.0, 0.0)) < 1e-12);
  CHECK(std::abs(a[1] - cplx(-2.0, 2.0)) < 1e-12);
  CHECK(std::abs(a[2] - cplx(-2.0, 0.0)) < 1e-12);
  CHECK(std::abs(a[3] - cplx(-2.0, -2.0)) < 1e-12);
}

TEST_CASE("impulse transforms to a flat spectrum") {
  std::vector<cplx> a(64, 0.0);
  a[0] = 1.0;
  fft_pow2(a, false);
  for (const cplx& x : a) CHECK(std::abs(x - cplx(1.0, 0.0)) < 1e-13);
}

TEST_CASE("fast transform agrees with the direct DFT") {
  const auto x = random_vector(1024, 11);
  auto fast = x;
  fft_pow2(fast, false);
  const auto slow = dft_direct(x, false);
  double scale = 0.0;
  for (const cplx& v : slow) scale = std::max(scale, std::abs(v));
  CHECK(max_abs_diff(fast, slow) / scale < 1e-9);
}

TEST_CASE("inverse undoes forward") {
  const auto x = random_vector(4096, 77);
  auto y = x;
  fft_pow2(y, false);
  fft_pow2(y, true);
  CHECK(max_abs_diff(x, y) < 1e-12);
}

TEST_CASE("non-power-of-two size is rejected") {
  std::vector<cplx> a(48, 0.0);
  CHECK_THROWS_AS(fft_pow2(a, false), std::invalid_argument);
}

TEST_CASE("linear convolution matches the direct sum") {
  const auto a = random_vector(37, 3);
  const auto b = random_vector(120, 4);
  const auto fast = convolve_linear(a, b);
  REQUIRE(fast.size() == 37 + 120 - 1);

  std::vector<cplx> slow(fast.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) slow[i + j] += a[i] * b[j];

  double scale = 0.0;
  for (const cplx& v : slow) scale = std::max(scale, std::abs(v));
  CHECK(max_abs_diff(fast, slow) / scale < 1e-9);
}

TEST_SUITE_END();
