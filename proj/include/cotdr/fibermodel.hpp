// Fiber under test: static speckle/reflector impulse response plus the
// time-varying effects of acoustic and thermal perturbations.

#pragma once

#include <cstdint>
#include <vector>

#include "cotdr/fft.hpp"
#include "cotdr/timeseries.hpp"

namespace cotdr {

constexpr double kSpeedOfLight = 299792458.0; // m/s
// Thermo-optic coefficient of silica, dn/dT per kelvin. Chosen so that a
// 0.1 K change gives an index change of 1e-6.
constexpr double kDnDt = 1e-5;

struct Reflector {
  double position_m = 0.0;
  double return_loss_db = 40.0; // power ratio, positive
};

struct Perturbation {
  enum class Kind { AcousticTone, TemperatureStep, TemperatureSeries };
  Kind kind = Kind::AcousticTone;
  double center_m = 0.0;
  double extent_m = 0.0;

  // AcousticTone: delta-n(t) = index_amplitude * sin(2 pi f t).
  double frequency_hz = 0.0;
  double index_amplitude = 0.0;

  // TemperatureStep: delta_t_kelvin applied from step_time_s onward.
  double delta_t_kelvin = 0.0;
  double step_time_s = 0.0;

  // TemperatureSeries: delta-T(t) sampled; zero-order hold between samples.
  TimeSeries temperature;
};

struct FiberSpec {
  double length_m = 400.0;
  double attenuation_db_per_km = 0.2;
  double group_index = 1.468;
  double backscatter_db_per_m = -70.0;
  // Mean spacing of discrete Rayleigh scatterers; <= 0 places one scatterer
  // per delay bin (the default speckle model).
  double scatterer_spacing_m = 0.0;
  double thermal_coeff_ps_per_k_km = 35.0; // one-way
  std::vector<Reflector> reflectors;
  std::uint64_t rng_seed = 1;
};

struct ImpulseResponse {
  std::vector<cplx> taps; // complex round-trip reflectivity per delay sample
  double sample_period_s = 0.0;
  double epoch_s = 0.0;
  // Set when the sample period cannot separate the closest reflector pair.
  bool merged_reflectors = false;
};

// Round-trip delay to a position: 2 * n_g * z / c. Throws when the position
// lies outside [0, length].
double round_trip_delay(const FiberSpec& spec, double position_m);

// One-way delay change of a heated/cooled section.
double thermal_delay_shift(const FiberSpec& spec, double section_km,
                           double delta_t_kelvin);

// Frozen speckle + reflector response at wavelength-independent baseline.
// Scatterer placement and amplitudes are seeded by spec.rng_seed alone.
ImpulseResponse build_static_response(const FiberSpec& spec, double sample_rate_hz);

// Time-varying response at frame epoch t: remote phase, local (in-section)
// phase share, and thermal delay shifts applied on top of the static taps.
ImpulseResponse apply_perturbations(const ImpulseResponse& base,
                                    const FiberSpec& spec,
                                    const std::vector<Perturbation>& perturbations,
                                    double t_s, double wavelength_m);

// First-order air-to-fiber temperature low-pass with time constant tau.
TimeSeries thermal_lag(const TimeSeries& air_temp, double tau_s);

} // namespace cotdr
