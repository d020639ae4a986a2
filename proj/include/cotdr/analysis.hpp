#pragma once

#include <cstddef>
#include <span>

#include "cotdr/correlator.hpp"
#include "cotdr/timeseries.hpp"

namespace cotdr {

// Result of a periodogram line search: the dominant spectral line in the
// requested band, plus the peak-to-peak excursion of the band-limited signal.
struct ToneReport {
  double frequency_hz = 0.0;
  double amplitude = 0.0; // sinusoid amplitude, same units as the series
  double pp = 0.0;        // max - min of the band-passed series
};

// Per-frame round-trip time between two correlation peaks. Each frame the
// peak is re-acquired within +/-2 bins of the nominal position (temperature
// drift moves peaks by whole bins) and refined with subsample_fit. Frames
// where either peak is missing (no strict local maximum nearby) become gap
// markers rather than interpolated values.
TimeSeries rtt_series(std::span<const CorrTrace> frames, std::size_t input_bin,
                      std::size_t output_bin);

// Per-frame backscattered power |values[bin]|^2.
TimeSeries amplitude_series(std::span<const CorrTrace> frames, std::size_t bin);

// Per-frame differential phase arg(v_b * conj(v_a)), unwrapped. A zero
// magnitude at either bin marks that frame as a gap.
TimeSeries phase_series(std::span<const CorrTrace> frames, std::size_t bin_a,
                        std::size_t bin_b);

// Classic 1-D phase unwrapping: successive differences are brought into
// (-pi, pi] before accumulating, so any true step below pi survives intact.
// A difference of exactly pi is ambiguous; it deterministically unwraps as
// +pi. Gap entries are carried through unchanged and the accumulation
// continues from the last valid sample.
TimeSeries unwrap(const TimeSeries& wrapped);

// Dominant line in [f_min, f_max] of a linearly detrended series. The
// frequency and amplitude are refined with a 3-point parabolic fit around
// the peak periodogram bin; pp is measured on the band-passed signal.
// Throws if the band contains no periodogram bin, if the series is shorter
// than two periods of f_min, or if the series contains gaps.
ToneReport tone_detect(const TimeSeries& series, double f_min, double f_max);

// Inverts an RTT series into a relative temperature series:
// dT[k] = (rtt[k] - rtt[ref]) / (2 * coeff * fiber_km), where ref is the
// first valid sample. Gaps propagate.
TimeSeries temp_estimate(const TimeSeries& rtt, double fiber_km,
                         double thermal_coeff_ps_per_k_km = 35.0);

} // namespace cotdr
