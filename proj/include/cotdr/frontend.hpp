// Receiver front end: probe propagation through the fiber response, direct
// and coherent detection with seeded noise, and ADC quantization.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cotdr/fft.hpp"
#include "cotdr/fibermodel.hpp"

namespace cotdr {

enum class DetectionMode { Direct, Coherent };

struct DetectionConfig {
  DetectionMode mode = DetectionMode::Direct;
  double thermal_noise_sigma = 0.0; // per-sample, per-component std dev
  double lo_linewidth_hz = 0.0;     // coherent only
  double lo_power_gain = 1.0;       // coherent only
  int adc_bits = 12;
  double adc_full_scale = 1.0;      // quantizer spans [-full_scale, +full_scale]
  int num_averages = 1;
};

struct RxFrame {
  std::vector<cplx> samples; // imaginary parts are zero for direct detection
  double sample_rate_hz = 0.0;
  double epoch_s = 0.0;
  DetectionMode detection = DetectionMode::Direct;
};

// Linear convolution of the probe field with the fiber taps, zero-padded to
// frame_len samples. Throws "frame_period too short" when the convolution
// does not fit.
std::vector<cplx> propagate(std::span<const double> probe,
                            const ImpulseResponse& h, std::size_t frame_len);

// Same result as propagate(), with the probe spectrum cached across frames.
class Propagator {
public:
  Propagator(std::span<const double> probe, std::size_t tap_count,
             std::size_t frame_len);
  std::vector<cplx> run(const ImpulseResponse& h) const;

private:
  std::vector<cplx> probe_fft_;
  std::size_t probe_len_;
  std::size_t tap_count_;
  std::size_t frame_len_;
  std::size_t fft_len_;
};

// Photodiode square law plus additive Gaussian noise.
std::vector<double> detect_direct(std::span<const cplx> field,
                                  const DetectionConfig& cfg,
                                  std::uint64_t noise_seed);

// Heterodyne mix against the shared-laser LO: sqrt(gain) * field * e^{-i theta},
// where theta starts at a uniform random frame phase (free-running laser
// between frames) and walks as a Wiener process with increment variance
// 2 pi * linewidth * dt per sample. Complex Gaussian noise on top.
std::vector<cplx> detect_coherent(std::span<const cplx> field,
                                  double sample_rate_hz,
                                  const DetectionConfig& cfg,
                                  std::uint64_t noise_seed);

// Quantizers. One bit slices at the sample mean (real, unipolar photocurrent)
// or at zero (complex, bipolar I/Q); more bits use mid-rise steps across
// [-full_scale, +full_scale].
std::vector<double> adc(std::span<const double> samples, const DetectionConfig& cfg);
std::vector<cplx> adc(std::span<const cplx> samples, const DetectionConfig& cfg);

} // namespace cotdr
