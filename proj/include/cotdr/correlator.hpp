// Cross-correlation of received frames against the transmitted sequence,
// and everything read off the resulting traces: fingerprints, peaks,
// sub-sample delays, per-bin phases.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cotdr/fft.hpp"
#include "cotdr/frontend.hpp"

namespace cotdr {

struct CorrTrace {
  std::vector<cplx> values;   // indexed by round-trip-delay sample
  double sample_period_s = 0.0;
  double epoch_s = 0.0;
  int num_averaged = 1;
};

struct Peak {
  std::size_t bin = 0;
  double refined_delay_s = 0.0;
  double magnitude = 0.0; // |values[bin]|
  double phase_rad = 0.0;
  bool fit_fallback = false; // refined_delay fell back to the raw bin
};

struct SubsampleFit {
  double refined_delay_s = 0.0;
  bool fallback = false;
};

enum class AverageMode {
  Complex, // mean of complex values; requires a shared LO phase epoch
  Power    // mean of |values|^2, stored as real magnitudes
};

struct Fingerprint {
  std::vector<double> power;      // |values|^2
  std::vector<double> distance_m; // z = c * tau / (2 n_g)
};

// Cross-correlate a frame with the reference waveform. Direct-detection
// frames use the mean-removed unipolar reference (the photocurrent carries a
// DC pedestal); coherent frames use the bipolar reference as-is. Lags run
// from 0 to frame length - reference length.
CorrTrace correlate(const RxFrame& frame, std::span<const double> reference);

// O(N^2) reference implementation of the same contract.
CorrTrace correlate_direct_sum(const RxFrame& frame,
                               std::span<const double> reference);

// Same result as correlate(), reference spectrum cached across frames.
class MatchedFilter {
public:
  MatchedFilter(std::span<const double> reference, DetectionMode mode,
                std::size_t frame_len);
  CorrTrace run(const RxFrame& frame) const;

private:
  std::vector<cplx> ref_fft_conj_;
  std::size_t ref_len_;
  std::size_t frame_len_;
  std::size_t fft_len_;
  DetectionMode mode_;
};

CorrTrace average(std::span<const CorrTrace> traces, AverageMode mode);

Fingerprint fingerprint(const CorrTrace& trace, double group_index);

// Local maxima exceeding a sliding-median floor by threshold_db, in bin
// order. refined_delay comes from subsample_fit.
std::vector<Peak> find_peaks(const CorrTrace& trace, double threshold_db,
                             std::size_t median_window = 129);

// Three-point parabolic interpolation on |values| around a local maximum.
SubsampleFit subsample_fit(const CorrTrace& trace, std::size_t bin);

// Wraps an angle into (-pi, pi]; exactly -pi maps to +pi.
double wrap_pi(double a);

// arg(values[bin]), wrapped to (-pi, pi]. Throws on zero magnitude.
double phase_at(const CorrTrace& trace, std::size_t bin);

// arg(values[b] * conj(values[a])): phase advance from bin_a to bin_b with
// any common-mode phase cancelled. Wrapped to (-pi, pi].
double diff_phase(const CorrTrace& trace, std::size_t bin_a, std::size_t bin_b);

} // namespace cotdr
