// Probe-side signal generation: PRBS sequences, the power-of-two "extended"
// variant, and rectangular NRZ modulation into sampled baseband waveforms.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cotdr {

enum class Modulation { Ook, Bpsk };

struct ProbeSpec {
  int prbs_order = 7;
  bool extended = false;          // pad sequence to 2^order bits
  Modulation modulation = Modulation::Ook;
  double bit_rate_hz = 10e9;
  int samples_per_bit = 1;
  double wavelength_m = 1550e-9;
  double frame_period_s = 0.0;    // 0 = let the scenario layer derive it

  double sample_rate_hz() const { return bit_rate_hz * samples_per_bit; }
  std::size_t sequence_bits() const {
    return (std::size_t{1} << prbs_order) - (extended ? 0 : 1);
  }
  double sequence_duration_s() const {
    return static_cast<double>(sequence_bits()) / bit_rate_hz;
  }
};

// One period of the maximal-length sequence for the given register length.
// The feedback polynomial comes from a fixed table covering orders 2..16.
// seed is the initial register content, LSB first, and must be nonzero.
std::vector<std::uint8_t> gen_prbs(int order, std::span<const std::uint8_t> seed);
std::vector<std::uint8_t> gen_prbs(int order); // all-ones seed

// Insert one zero right after the longest zero run (searched circularly),
// growing a 2^k - 1 bit sequence to 2^k bits.
std::vector<std::uint8_t> extend_prbs(std::span<const std::uint8_t> seq);

// Rectangular NRZ: every bit is held for samples_per_bit samples.
// OOK maps {0,1} to {0,1}; BPSK maps {0,1} to {-1,+1}.
std::vector<double> modulate(std::span<const std::uint8_t> bits,
                             const ProbeSpec& spec);

// Convenience wrappers that apply the whole ProbeSpec.
std::vector<std::uint8_t> probe_bits(const ProbeSpec& spec);
std::vector<double> probe_waveform(const ProbeSpec& spec);

} // namespace cotdr
