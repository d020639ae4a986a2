#pragma once

#include <cstdint>
#include <vector>

#include "cotdr/correlator.hpp"
#include "cotdr/fibermodel.hpp"
#include "cotdr/frontend.hpp"
#include "cotdr/probegen.hpp"

namespace cotdr {

// Everything needed to synthesize correlation traces for one fiber setup.
struct EngineConfig {
  ProbeSpec probe;
  FiberSpec fiber;
  std::vector<Perturbation> perturbations;
  DetectionConfig detection;
  double frame_rate_hz = 0.0; // 0: single-shot, all frames at t = 0
  std::uint64_t seed = 1;
};

// Per-frame pipeline: perturb the fiber response, propagate the probe,
// detect, quantize, correlate, and average the configured number of
// repetitions. The probe spectrum, static response, and reference spectrum
// are computed once.
//
// num_averages repetitions share the frame's fiber state and differ only in
// noise (and LO phase when coherent). Direct-detection repetitions average
// coherently; coherent ones average in power, because each repetition draws
// a fresh laser phase. Phase readout therefore requires num_averages == 1.
class FrameEngine {
public:
  explicit FrameEngine(EngineConfig cfg);

  CorrTrace run_frame(std::size_t index);

  const ImpulseResponse& static_response() const { return h0_; }
  const std::vector<double>& reference() const { return reference_; }
  std::size_t frame_len() const { return frame_len_; }
  std::size_t trace_len() const { return frame_len_ - reference_.size() + 1; }
  double sample_rate_hz() const { return fs_; }

private:
  EngineConfig cfg_;
  double fs_;
  std::vector<double> reference_;
  ImpulseResponse h0_;
  std::size_t frame_len_;
  Propagator propagator_;
  MatchedFilter filter_;
};

} // namespace cotdr
