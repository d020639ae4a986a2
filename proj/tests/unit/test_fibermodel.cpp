#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "cotdr/fibermodel.hpp"

using namespace cotdr;

namespace {

// Group index that makes one round-trip nanosecond correspond to exactly
// 0.1 m, i.e. tau = z * 1e-8 s/m. Keeps delay bins on friendly grids.
constexpr double kGridIndex = 299792458.0 / 2e8;

FiberSpec quiet_fiber(double length_m) {
  FiberSpec spec;
  spec.length_m = length_m;
  spec.attenuation_db_per_km = 0.0;
  spec.group_index = kGridIndex;
  spec.backscatter_db_per_m = -300.0; // scatterers negligible
  spec.rng_seed = 42;
  return spec;
}

} // namespace

TEST_SUITE_BEGIN("fibermodel");

TEST_CASE("round_trip_delay evaluates 2 n_g z / c") {
  FiberSpec spec;
  spec.length_m = 200000.0;

  spec.group_index = 1.5;
  CHECK(round_trip_delay(spec, 400.0) ==
        doctest::Approx(2.0 * 1.5 * 400.0 / 299792458.0).epsilon(1e-12));
  // ~4.0 microseconds end to end for the 400 m fiber.
  CHECK(round_trip_delay(spec, 400.0) == doctest::Approx(4.0e-6).epsilon(2e-3));

  spec.group_index = 1.468;
  CHECK(round_trip_delay(spec, 100000.0) ==
        doctest::Approx(2.0 * 1.468 * 100000.0 / 299792458.0).epsilon(1e-12));
  CHECK(round_trip_delay(spec, 0.0) == 0.0);
  CHECK_THROWS_AS(round_trip_delay(spec, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(round_trip_delay(spec, 2.1e5), std::invalid_argument);
}

TEST_CASE("thermal_delay_shift is linear in section and temperature") {
  FiberSpec spec; // default 35 ps/(K km)
  CHECK(thermal_delay_shift(spec, 1.0, 1.0) == doctest::Approx(35e-12).epsilon(1e-12));
  CHECK(thermal_delay_shift(spec, 123.0, 0.0) == 0.0);
  CHECK(thermal_delay_shift(spec, 10.0, 2.0) == doctest::Approx(700e-12).epsilon(1e-12));
}

TEST_CASE("single reflector becomes a single tap of the right magnitude") {
  FiberSpec spec = quiet_fiber(200.0);
  spec.attenuation_db_per_km = 0.2;
  spec.reflectors = {{100.0, 40.0}};

  const ImpulseResponse h = build_static_response(spec, 1e9); // 1 ns bins
  // tau = 100 m * 1e-8 s/m = 1 us -> bin 1000.
  const double expected =
      std::pow(10.0, -40.0 / 20.0) * std::pow(10.0, -0.2 * 0.1 / 10.0);
  REQUIRE(h.taps.size() >= 1001);
  CHECK(std::abs(h.taps[1000] - cplx{expected, 0.0}) < 1e-12);
  for (std::size_t k = 0; k < h.taps.size(); ++k) {
    if (k != 1000) CHECK(std::abs(h.taps[k]) < 1e-12);
  }
  CHECK_FALSE(h.merged_reflectors);
}

TEST_CASE("backscatter power per meter matches the configured coefficient") {
  // Average total tap power over the first metre across many seeds; the
  // model promises 10^(-70/10) = 1e-7 per metre at z ~ 0.
  double acc = 0.0;
  const int seeds = 120;
  for (int s = 0; s < seeds; ++s) {
    FiberSpec spec;
    spec.length_m = 5.0;
    spec.attenuation_db_per_km = 0.0;
    spec.group_index = kGridIndex;
    spec.backscatter_db_per_m = -70.0;
    spec.rng_seed = 1000 + static_cast<std::uint64_t>(s);
    const ImpulseResponse h = build_static_response(spec, 2e9); // dz = 0.05 m
    double p = 0.0;
    for (std::size_t k = 0; k < 20; ++k) p += std::norm(h.taps[k]);
    acc += p;
  }
  const double mean_power = acc / seeds;
  CHECK(mean_power == doctest::Approx(1e-7).epsilon(0.10));
}

TEST_CASE("same seed reproduces the speckle, different seed changes it") {
  FiberSpec spec;
  spec.length_m = 50.0;
  spec.group_index = kGridIndex;
  spec.rng_seed = 7;
  const ImpulseResponse a = build_static_response(spec, 1e9);
  const ImpulseResponse b = build_static_response(spec, 1e9);
  REQUIRE(a.taps.size() == b.taps.size());
  for (std::size_t k = 0; k < a.taps.size(); ++k) CHECK(a.taps[k] == b.taps[k]);

  spec.rng_seed = 8;
  const ImpulseResponse c = build_static_response(spec, 1e9);
  bool any_different = false;
  for (std::size_t k = 0; k < a.taps.size(); ++k) {
    if (a.taps[k] != c.taps[k]) any_different = true;
  }
  CHECK(any_different);
}

TEST_CASE("scatterer placement honors a positive mean spacing") {
  FiberSpec spec;
  spec.length_m = 100.0;
  spec.group_index = kGridIndex;
  spec.scatterer_spacing_m = 0.5;
  spec.rng_seed = 3;
  const ImpulseResponse h = build_static_response(spec, 1e9); // dz = 0.1 m
  std::size_t occupied = 0;
  for (const cplx& t : h.taps) {
    if (std::abs(t) > 0.0) ++occupied;
  }
  // ~200 scatterers over 1000 bins; collisions make `occupied` slightly low.
  CHECK(occupied > 120);
  CHECK(occupied < 260);
}

TEST_CASE("attenuation never increases tap magnitudes") {
  FiberSpec lossless;
  lossless.length_m = 80.0;
  lossless.group_index = kGridIndex;
  lossless.attenuation_db_per_km = 0.0;
  lossless.rng_seed = 11;
  FiberSpec lossy = lossless;
  lossy.attenuation_db_per_km = 5.0;

  const ImpulseResponse h0 = build_static_response(lossless, 1e9);
  const ImpulseResponse h1 = build_static_response(lossy, 1e9);
  REQUIRE(h0.taps.size() == h1.taps.size());
  for (std::size_t k = 0; k < h0.taps.size(); ++k) {
    CHECK(std::abs(h1.taps[k]) <= std::abs(h0.taps[k]) + 1e-18);
  }
}

TEST_CASE("reflector field scaling is exact") {
  FiberSpec spec = quiet_fiber(50.0);
  spec.reflectors = {{20.0, 30.0}};
  const ImpulseResponse a = build_static_response(spec, 1e9);
  spec.reflectors = {{20.0, 50.0}}; // 20 dB more return loss = 0.1x field
  const ImpulseResponse b = build_static_response(spec, 1e9);
  CHECK(std::abs(b.taps[200] - a.taps[200] * 0.1) < 1e-15);
}

TEST_CASE("close reflectors set the merged flag") {
  FiberSpec spec = quiet_fiber(50.0);
  spec.reflectors = {{20.0, 40.0}, {20.04, 40.0}}; // 0.4 ns apart at 1 ns bins
  CHECK(build_static_response(spec, 1e9).merged_reflectors);
  spec.reflectors = {{20.0, 40.0}, {25.0, 40.0}};
  CHECK_FALSE(build_static_response(spec, 1e9).merged_reflectors);
}

TEST_CASE("invalid fiber specs are rejected") {
  FiberSpec spec;
  spec.length_m = -1.0;
  CHECK_THROWS_AS(build_static_response(spec, 1e9), std::invalid_argument);
  spec = FiberSpec{};
  spec.group_index = 1.7;
  CHECK_THROWS_AS(build_static_response(spec, 1e9), std::invalid_argument);
  spec = FiberSpec{};
  spec.reflectors = {{spec.length_m, 40.0}}; // on the boundary, not inside
  CHECK_THROWS_AS(build_static_response(spec, 1e9), std::invalid_argument);
}

TEST_CASE("zero-strength perturbation leaves the response bit-identical") {
  FiberSpec spec;
  spec.length_m = 400.0;
  spec.group_index = kGridIndex;
  spec.rng_seed = 5;
  const ImpulseResponse base = build_static_response(spec, 1.6e9);

  Perturbation tone;
  tone.kind = Perturbation::Kind::AcousticTone;
  tone.center_m = 200.0;
  tone.extent_m = 2.0;
  tone.frequency_hz = 120.0;
  tone.index_amplitude = 0.0;

  const ImpulseResponse same =
      apply_perturbations(base, spec, {tone}, 0.125, 1550e-9);
  REQUIRE(same.taps.size() == base.taps.size());
  for (std::size_t k = 0; k < base.taps.size(); ++k) {
    CHECK(same.taps[k] == base.taps[k]);
  }
}

TEST_CASE("remote taps acquire twice the one-way phase") {
  FiberSpec spec = quiet_fiber(300.0);
  spec.reflectors = {{250.0, 40.0}};
  const ImpulseResponse base = build_static_response(spec, 1e9);

  Perturbation tone;
  tone.kind = Perturbation::Kind::AcousticTone;
  tone.center_m = 100.0;
  tone.extent_m = 0.1;
  tone.frequency_hz = 1.0;
  tone.index_amplitude = 1e-6;

  // sin(2 pi f t) = 1 at t = 0.25 s, so delta-n = 1e-6 over 0.1 m.
  const ImpulseResponse on =
      apply_perturbations(base, spec, {tone}, 0.25, 1550e-9);
  const double phi_one_way = 2.0 * M_PI * 1e-6 * 0.1 / 1550e-9;
  CHECK(phi_one_way == doctest::Approx(0.405367).epsilon(1e-5));

  const std::size_t bin = 2500;
  const double got = std::arg(on.taps[bin] * std::conj(base.taps[bin]));
  CHECK(got == doctest::Approx(2.0 * phi_one_way).epsilon(1e-9));
  CHECK(std::abs(on.taps[bin]) == doctest::Approx(std::abs(base.taps[bin])));
}

TEST_CASE("taps before the perturbed section never change") {
  FiberSpec spec;
  spec.length_m = 400.0;
  spec.group_index = kGridIndex;
  spec.rng_seed = 9;
  const ImpulseResponse base = build_static_response(spec, 1.6e9);

  Perturbation tone;
  tone.kind = Perturbation::Kind::AcousticTone;
  tone.center_m = 300.0;
  tone.extent_m = 2.0;
  tone.frequency_hz = 120.0;
  tone.index_amplitude = 3e-7;

  Perturbation step;
  step.kind = Perturbation::Kind::TemperatureStep;
  step.center_m = 350.0;
  step.extent_m = 10.0;
  step.delta_t_kelvin = 2.0;

  const ImpulseResponse on =
      apply_perturbations(base, spec, {tone, step}, 0.00321, 1550e-9);
  const double bin_width_m = base.sample_period_s * 299792458.0 / (2.0 * spec.group_index);
  for (std::size_t k = 0; k < base.taps.size(); ++k) {
    if (static_cast<double>(k) * bin_width_m < 299.0) {
      CHECK(on.taps[k] == base.taps[k]);
    }
  }
}

TEST_CASE("tracked remote phase follows the acoustic tone analytically") {
  FiberSpec spec;
  spec.length_m = 400.0;
  spec.group_index = kGridIndex;
  spec.rng_seed = 21;
  const ImpulseResponse base = build_static_response(spec, 1.6e9);

  Perturbation tone;
  tone.kind = Perturbation::Kind::AcousticTone;
  tone.center_m = 200.0;
  tone.extent_m = 2.0;
  tone.frequency_hz = 120.0;
  tone.index_amplitude = 2e-7;
  const double phi_max = 2.0 * M_PI * 2e-7 * 2.0 / 1550e-9;

  // Sum of all taps well beyond the section: the common factor e^{i 2 phi}
  // rotates the sum without deforming it.
  const std::size_t start_bin = 3600; // z = 225 m at 1.6 GSps on this grid
  cplx ref_sum = 0.0;
  for (std::size_t k = start_bin; k < base.taps.size(); ++k) ref_sum += base.taps[k];

  for (int frame = 0; frame < 16; ++frame) {
    const double t = frame / 2000.0;
    const ImpulseResponse on =
        apply_perturbations(base, spec, {tone}, t, 1550e-9);
    cplx sum = 0.0;
    for (std::size_t k = start_bin; k < on.taps.size(); ++k) sum += on.taps[k];
    const double expected = 2.0 * phi_max * std::sin(2.0 * M_PI * 120.0 * t);
    const double got = std::arg(sum * std::conj(ref_sum));
    // arg() wraps to (-pi, pi]; compare on the circle.
    double residual = got - expected;
    residual -= 2.0 * M_PI * std::round(residual / (2.0 * M_PI));
    CHECK(std::abs(residual) < 1e-9);
  }
}

TEST_CASE("temperature step shifts a remote tap by whole bins when aligned") {
  // 1 K over a 1000 m section shifts round-trip delay by 70 ps; with 70 ps
  // bins that is exactly one bin.
  FiberSpec spec = quiet_fiber(1100.0);
  spec.reflectors = {{1050.0, 45.0}};
  const double fs = 1.0 / 70e-12;
  const ImpulseResponse base = build_static_response(spec, fs);

  Perturbation step;
  step.kind = Perturbation::Kind::TemperatureStep;
  step.center_m = 520.0;
  step.extent_m = 1000.0;
  step.delta_t_kelvin = 1.0;
  step.step_time_s = 1.0;

  const std::size_t bin = 150000; // tau = 10.5 us / 70 ps
  REQUIRE(std::abs(base.taps[bin]) > 1e-4);

  // Before the step time: nothing moves.
  const ImpulseResponse before =
      apply_perturbations(base, spec, {step}, 0.5, 1550e-9);
  CHECK(before.taps[bin] == base.taps[bin]);

  const ImpulseResponse after =
      apply_perturbations(base, spec, {step}, 2.0, 1550e-9);
  CHECK(std::abs(after.taps[bin]) < 1e-15);
  CHECK(std::abs(after.taps[bin + 1]) ==
        doctest::Approx(std::abs(base.taps[bin])).epsilon(1e-12));
}

TEST_CASE("fractional delay shifts interpolate sensibly") {
  FiberSpec spec = quiet_fiber(1100.0);
  spec.reflectors = {{1050.0, 45.0}};
  const double fs = 1.0 / 70e-12;
  const ImpulseResponse base = build_static_response(spec, fs);
  const std::size_t bin = 150000;

  Perturbation step;
  step.kind = Perturbation::Kind::TemperatureStep;
  step.center_m = 520.0;
  step.extent_m = 1000.0;
  step.delta_t_kelvin = 0.5; // 35 ps = half a bin
  const ImpulseResponse half =
      apply_perturbations(base, spec, {step}, 0.0, 1550e-9);

  // Kernel symmetry: the two bins around the half-sample target match.
  CHECK(std::abs(half.taps[bin]) ==
        doctest::Approx(std::abs(half.taps[bin + 1])).epsilon(1e-9));
  // The interpolator is transparent at DC: the coherent sum of the spread
  // tap keeps the original magnitude to within a fraction of a percent
  // (the thermal phase rotation applies on top, so compare magnitudes).
  cplx dc = 0.0;
  for (std::size_t k = bin - 4; k <= bin + 5; ++k) dc += half.taps[k];
  CHECK(std::abs(dc) == doctest::Approx(std::abs(base.taps[bin])).epsilon(5e-3));

  // A barely-off-grid shift lands where the exact grid move would.
  step.delta_t_kelvin = 1.0 + 1e-7;
  const ImpulseResponse near_int =
      apply_perturbations(base, spec, {step}, 0.0, 1550e-9);
  CHECK(std::abs(near_int.taps[bin + 1]) ==
        doctest::Approx(std::abs(base.taps[bin])).epsilon(1e-4));
}

TEST_CASE("perturbation validation") {
  FiberSpec spec = quiet_fiber(100.0);
  const ImpulseResponse base = build_static_response(spec, 1e9);
  Perturbation bad;
  bad.kind = Perturbation::Kind::AcousticTone;
  bad.center_m = 99.0;
  bad.extent_m = 4.0; // pokes past the far end
  bad.index_amplitude = 1e-7;
  bad.frequency_hz = 10.0;
  CHECK_THROWS_AS(apply_perturbations(base, spec, {bad}, 0.0, 1550e-9),
                  std::invalid_argument);
}

TEST_CASE("thermal_lag first-order step response") {
  const double tau = 12.7 * 86400.0;
  TimeSeries air;
  air.t0_s = 0.0;
  air.dt_s = tau / 1000.0;
  air.values.assign(1500, 1.0);
  air.values[0] = 0.0;

  const TimeSeries fiber = thermal_lag(air, tau);
  REQUIRE(fiber.values.size() == air.values.size());
  CHECK(fiber.values[0] == 0.0);

  // One time constant after the step (k = 1001): 1 - (1 - dt/tau)^1000.
  const double expected = 1.0 - std::pow(1.0 - 1.0 / 1000.0, 1000.0);
  CHECK(fiber.values[1001] == doctest::Approx(expected).epsilon(1e-9));
  CHECK(fiber.values[1001] == doctest::Approx(0.632).epsilon(0.01));

  // Monotone approach to the final value.
  CHECK(fiber.values[1400] > fiber.values[1001]);
  CHECK(fiber.values[1400] < 1.0);
}

TEST_CASE("thermal_lag tracks a constant exactly") {
  TimeSeries air;
  air.dt_s = 60.0;
  air.values.assign(100, 5.0);
  const TimeSeries fiber = thermal_lag(air, 3600.0);
  for (double v : fiber.values) CHECK(v == 5.0);
}

TEST_CASE("thermal_lag attenuates a sinusoid per first-order response") {
  const double tau = 100.0;
  const double period = 8.0 * tau;
  TimeSeries air;
  air.dt_s = tau / 200.0;
  const std::size_t n = static_cast<std::size_t>(6.0 * period / air.dt_s);
  air.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    air.values[k] = std::sin(2.0 * M_PI * air.time_at(k) / period);
  }
  const TimeSeries fiber = thermal_lag(air, tau);

  // Skip four periods of transient, then read the steady-state amplitude.
  const std::size_t settle = static_cast<std::size_t>(4.0 * period / air.dt_s);
  double lo = 1e300, hi = -1e300;
  for (std::size_t k = settle; k < n; ++k) {
    lo = std::min(lo, fiber.values[k]);
    hi = std::max(hi, fiber.values[k]);
  }
  const double expected = 1.0 / std::sqrt(1.0 + std::pow(2.0 * M_PI * tau / period, 2.0));
  CHECK((hi - lo) / 2.0 == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("thermal_lag rejects unstable discretization") {
  TimeSeries air;
  air.dt_s = 10.0;
  air.values.assign(10, 0.0);
  CHECK_THROWS_WITH_AS(thermal_lag(air, 5.0), "unstable discretization: dt >= tau",
                       std::invalid_argument);
}

TEST_SUITE_END();
