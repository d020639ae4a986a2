// Minimal power-of-two FFT plus the convolution helpers built on it.
//
// A hand-rolled radix-2 transform is plenty for this project: every hot path
// pads to a power of two, sizes stay below 2^17, and keeping the butterflies
// in-tree guarantees bit-identical output on every platform we build on.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cotdr {

using cplx = std::complex<double>;

// Smallest power of two >= n (n = 0 maps to 1).
std::size_t next_pow2(std::size_t n);

// In-place transform; a.size() must be a power of two. The forward kernel is
// exp(-i 2 pi k n / N); the inverse conjugates and scales by 1/N.
void fft_pow2(std::vector<cplx>& a, bool inverse);

// O(N^2) reference transform, any size. Kept as the oracle the fast path is
// tested against, and used directly where N is small and not a power of two.
std::vector<cplx> dft_direct(std::span<const cplx> a, bool inverse);

// Full linear convolution, output length a.size() + b.size() - 1.
std::vector<cplx> convolve_linear(std::span<const cplx> a,
                                  std::span<const cplx> b);

} // namespace cotdr
