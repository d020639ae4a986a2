#include "cotdr/frontend.hpp"

#include <cmath>
#include <stdexcept>

#include "cotdr/rng.hpp"

namespace cotdr {

namespace {

inline cplx cmul(const cplx& a, const cplx& b) {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

void check_adc(const DetectionConfig& cfg) {
  if (cfg.adc_bits < 1 || cfg.adc_bits > 16) {
    throw std::invalid_argument("adc_bits must be within [1, 16]");
  }
  if (cfg.adc_full_scale <= 0.0) {
    throw std::invalid_argument("adc full-scale range must be positive");
  }
}

double midrise(double x, double full_scale, int bits) {
  const double step = 2.0 * full_scale / static_cast<double>(1 << bits);
  double q = step * (std::floor(x / step) + 0.5);
  const double top = full_scale - step / 2.0;
  if (q > top) q = top;
  if (q < -top) q = -top;
  return q;
}

} // namespace

std::vector<cplx> propagate(std::span<const double> probe,
                            const ImpulseResponse& h, std::size_t frame_len) {
  if (probe.empty() || h.taps.empty()) {
    throw std::invalid_argument("propagate: empty probe or response");
  }
  const std::size_t conv_len = probe.size() + h.taps.size() - 1;
  if (conv_len > frame_len) {
    throw std::invalid_argument("frame_period too short for probe and fiber");
  }
  std::vector<cplx> probe_c(probe.size());
  for (std::size_t i = 0; i < probe.size(); ++i) probe_c[i] = probe[i];
  std::vector<cplx> out = convolve_linear(probe_c, h.taps);
  out.resize(frame_len, cplx{0.0, 0.0});
  return out;
}

Propagator::Propagator(std::span<const double> probe, std::size_t tap_count,
                       std::size_t frame_len)
    : probe_len_(probe.size()), tap_count_(tap_count), frame_len_(frame_len) {
  if (probe.empty() || tap_count == 0) {
    throw std::invalid_argument("propagate: empty probe or response");
  }
  if (probe_len_ + tap_count_ - 1 > frame_len_) {
    throw std::invalid_argument("frame_period too short for probe and fiber");
  }
  fft_len_ = next_pow2(probe_len_ + tap_count_ - 1);
  probe_fft_.assign(fft_len_, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < probe.size(); ++i) probe_fft_[i] = probe[i];
  fft_pow2(probe_fft_, false);
}

std::vector<cplx> Propagator::run(const ImpulseResponse& h) const {
  if (h.taps.size() != tap_count_) {
    throw std::invalid_argument("Propagator: tap count changed between frames");
  }
  std::vector<cplx> work(fft_len_, cplx{0.0, 0.0});
  std::copy(h.taps.begin(), h.taps.end(), work.begin());
  fft_pow2(work, false);
  for (std::size_t i = 0; i < fft_len_; ++i) work[i] = cmul(work[i], probe_fft_[i]);
  fft_pow2(work, true);
  work.resize(probe_len_ + tap_count_ - 1);
  work.resize(frame_len_, cplx{0.0, 0.0});
  return work;
}

std::vector<double> detect_direct(std::span<const cplx> field,
                                  const DetectionConfig& cfg,
                                  std::uint64_t noise_seed) {
  Rng rng(noise_seed);
  std::vector<double> out(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) {
    out[k] = std::norm(field[k]);
    if (cfg.thermal_noise_sigma > 0.0) {
      out[k] += cfg.thermal_noise_sigma * rng.gaussian();
    }
  }
  return out;
}

std::vector<cplx> detect_coherent(std::span<const cplx> field,
                                  double sample_rate_hz,
                                  const DetectionConfig& cfg,
                                  std::uint64_t noise_seed) {
  if (sample_rate_hz <= 0.0) {
    throw std::invalid_argument("detect_coherent: sample rate must be positive");
  }
  if (cfg.lo_linewidth_hz < 0.0 || cfg.lo_power_gain <= 0.0) {
    throw std::invalid_argument("detect_coherent: bad LO parameters");
  }
  Rng rng(noise_seed);
  const double amp = std::sqrt(cfg.lo_power_gain);
  const double inc_sigma =
      std::sqrt(2.0 * M_PI * cfg.lo_linewidth_hz / sample_rate_hz);

  // Frame start phase is arbitrary: the laser free-runs between frames.
  double theta = 2.0 * M_PI * rng.uniform();
  std::vector<cplx> out(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) {
    if (k > 0 && inc_sigma > 0.0) theta += inc_sigma * rng.gaussian();
    out[k] = amp * cmul(field[k], std::polar(1.0, -theta));
  }
  if (cfg.thermal_noise_sigma > 0.0) {
    for (auto& s : out) s += rng.circular_gaussian(cfg.thermal_noise_sigma);
  }
  return out;
}

std::vector<double> adc(std::span<const double> samples,
                        const DetectionConfig& cfg) {
  check_adc(cfg);
  std::vector<double> out(samples.size());
  if (cfg.adc_bits == 1) {
    double mean = 0.0;
    for (double s : samples) mean += s;
    if (!samples.empty()) mean /= static_cast<double>(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
      out[k] = samples[k] >= mean ? 1.0 : -1.0;
    }
    return out;
  }
  for (std::size_t k = 0; k < samples.size(); ++k) {
    out[k] = midrise(samples[k], cfg.adc_full_scale, cfg.adc_bits);
  }
  return out;
}

std::vector<cplx> adc(std::span<const cplx> samples, const DetectionConfig& cfg) {
  check_adc(cfg);
  std::vector<cplx> out(samples.size());
  if (cfg.adc_bits == 1) {
    for (std::size_t k = 0; k < samples.size(); ++k) {
      out[k] = {samples[k].real() >= 0.0 ? 1.0 : -1.0,
                samples[k].imag() >= 0.0 ? 1.0 : -1.0};
    }
    return out;
  }
  for (std::size_t k = 0; k < samples.size(); ++k) {
    out[k] = {midrise(samples[k].real(), cfg.adc_full_scale, cfg.adc_bits),
              midrise(samples[k].imag(), cfg.adc_full_scale, cfg.adc_bits)};
  }
  return out;
}

} // namespace cotdr
