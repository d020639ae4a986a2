#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cotdr/fft.hpp"

namespace cotdr {

// On-disk correlation trace archive. Layout (little-endian):
//   magic "COTD" | u16 version=1 | u8 flags (bit0: complex payload)
//   | f64 sample_rate_hz | u32 frame_len | u32 frame_count
//   | frame_count * frame_len float32 payloads (interleaved I,Q if complex)
// Payloads are float32 on purpose: the archive is the exchange format, and
// pinning the precision keeps reruns byte-identical across toolchains.
struct TraceArchive {
  bool complex_frames = true;
  double sample_rate_hz = 0.0; // 1 / sample period of the stored traces
  std::size_t frame_len = 0;
  std::vector<std::vector<cplx>> frames; // imaginary parts zero when real

  // Round-trips a value through the archive's float32 payload precision.
  static double quantize(double v) { return static_cast<float>(v); }
};

void write_trace_archive(const std::string& path, const TraceArchive& archive);

// Throws std::runtime_error on missing files, bad magic, unsupported
// version, or truncation.
TraceArchive read_trace_archive(const std::string& path);

} // namespace cotdr
