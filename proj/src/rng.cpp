#include "cotdr/rng.hpp"

#include <cmath>

namespace cotdr {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                       std::uint64_t d) {
  std::uint64_t s = a;
  std::uint64_t h = splitmix64(s);
  s ^= b + 0xD1B54A32D192ED03ULL;
  h ^= splitmix64(s);
  s ^= c + 0x8CB92BA72F3D8DD7ULL;
  h ^= splitmix64(s);
  s ^= d + 0xEB44ACCAB455D165ULL;
  h ^= splitmix64(s);
  return h;
}

double Rng::uniform() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 must stay away from 0 for the log; 2^-53 is the smallest uniform().
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double Rng::rayleigh(double sigma) {
  double u = 0.0;
  do {
    u = uniform();
  } while (u <= 0.0);
  return sigma * std::sqrt(-2.0 * std::log(u));
}

std::complex<double> Rng::circular_gaussian(double sigma) {
  const double re = gaussian();
  const double im = gaussian();
  return {sigma * re, sigma * im};
}

} // namespace cotdr
