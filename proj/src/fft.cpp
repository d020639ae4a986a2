#include "cotdr/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace cotdr {

namespace {

// Plain complex multiply. std::complex operator* routes through the
// NaN-correct libgcc helper, which is an order of magnitude slower than we
// can afford inside the butterflies.
inline cplx cmul(const cplx& a, const cplx& b) {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

// Forward twiddle tables, one per transform size, built lazily.
const std::vector<cplx>& twiddles(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::vector<cplx>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cplx> w(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    w[k] = std::polar(1.0, -2.0 * M_PI * static_cast<double>(k) /
                               static_cast<double>(n));
  }
  return cache.emplace(n, std::move(w)).first->second;
}

} // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_pow2(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("fft_pow2: size must be a power of two");
  }
  if (n == 1) return;

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const std::vector<cplx>& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        cplx tw = w[k * stride];
        if (inverse) tw = std::conj(tw);
        const cplx u = a[i + k];
        const cplx v = cmul(a[i + k + len / 2], tw);
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (cplx& x : a) x *= scale;
  }
}

std::vector<cplx> dft_direct(std::span<const cplx> a, bool inverse) {
  const std::size_t n = a.size();
  std::vector<cplx> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const double ang = sign * 2.0 * M_PI * static_cast<double>(k) *
                         static_cast<double>(m) / static_cast<double>(n);
      const double c = std::cos(ang);
      const double s = std::sin(ang);
      re += a[m].real() * c - a[m].imag() * s;
      im += a[m].real() * s + a[m].imag() * c;
    }
    out[k] = {re, im};
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (cplx& x : out) x *= scale;
  }
  return out;
}

std::vector<cplx> convolve_linear(std::span<const cplx> a,
                                  std::span<const cplx> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("convolve_linear: empty input");
  }
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  std::vector<cplx> fa(n), fb(n);
  std::copy(a.begin(), a.end(), fa.begin());
  std::copy(b.begin(), b.end(), fb.begin());
  fft_pow2(fa, false);
  fft_pow2(fb, false);
  for (std::size_t i = 0; i < n; ++i) fa[i] = cmul(fa[i], fb[i]);
  fft_pow2(fa, true);
  fa.resize(out_len);
  return fa;
}

} // namespace cotdr
