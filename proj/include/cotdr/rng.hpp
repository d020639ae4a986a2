// Deterministic random number helpers shared by the whole simulation.
//
// Reproducibility across compilers matters more than raw quality here, so the
// transforms on top of the engine are written out by hand instead of going
// through std::normal_distribution (whose algorithm is unspecified).

#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace cotdr {

// One splitmix64 step: advances `state` and returns a scrambled output.
std::uint64_t splitmix64(std::uint64_t& state);

// Hashes up to four words into a single substream seed. Used to key
// per-frame / per-purpose noise streams off one scenario seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0,
                       std::uint64_t c = 0, std::uint64_t d = 0);

class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform draw in [0, 1) with 53 random bits.
  double uniform();

  // Standard normal via Box-Muller (second value of each pair is cached).
  double gaussian();

  // Rayleigh with scale (mode) sigma.
  double rayleigh(double sigma);

  // Complex sample whose real and imaginary parts are N(0, sigma^2).
  std::complex<double> circular_gaussian(double sigma);

private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace cotdr
