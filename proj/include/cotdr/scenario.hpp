#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cotdr/analysis.hpp"
#include "cotdr/correlator.hpp"
#include "cotdr/engine.hpp"
#include "cotdr/fbg.hpp"
#include "cotdr/trace_archive.hpp"

namespace cotdr {

// One requested readout of a run. Which fields matter depends on kind:
//   rtt        input_m -> output_m connector delay (defaults: first and last
//              reflector when left negative)
//   amplitude  |trace|^2 at position_m
//   phase      unwrapped diff_phase between position_a_m and position_b_m
//   tone       tone_detect over [f_min_hz, f_max_hz] on the series named by
//              `source` (any earlier series analysis)
//   temp       temp_estimate on the rtt series named by `source`, heated
//              span section_km, coefficient coeff_ps_per_k_km
//   fbg        wavelength sweep of the scenario's fbg section
struct AnalysisDirective {
  enum class Kind { Rtt, Amplitude, Phase, Tone, Temp, Fbg };
  Kind kind = Kind::Rtt;
  std::string name;
  double input_m = -1.0;
  double output_m = -1.0;
  double position_m = 0.0;
  double position_a_m = 0.0;
  double position_b_m = 0.0;
  std::string source;
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;
  double section_km = 0.0;
  double coeff_ps_per_k_km = 35.0;
};

// Declarative description of one experiment: plant, instrument, schedule,
// and the analyses to run on the recorded frames.
struct Scenario {
  std::string name = "scenario";
  std::string description; // free-form, e.g. how the noise level was chosen
  ProbeSpec probe;
  FiberSpec fiber;
  std::vector<Perturbation> perturbations;
  DetectionConfig detection;
  std::size_t frames = 1;
  double frame_rate_hz = 0.0;
  std::uint64_t seed = 1;
  double peak_threshold_db = 15.0;
  std::vector<AnalysisDirective> analyses;
  bool has_fbg = false;
  FbgScenario fbg;
};

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string path; // dotted field path, e.g. "fiber.length_m"
  int line = 0;     // 1-based line in the scenario file, 0 when unknown
  std::string message;
};

std::string to_string(const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& diags);

// Thrown by load_scenario when any error-severity diagnostic is present;
// the message lists one diagnostic per line.
struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a run produces a non-finite output value (exit code 2 at the
// CLI, distinct from scenario validation failures).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Parsing appends field-level problems to `diags` and keeps going with
// defaults, so one pass reports as much as possible. Only structural
// failures throw: unreadable file, JSON syntax error (message carries the
// parser's line/column), or a non-object document.
Scenario parse_scenario(const std::string& text, std::vector<Diagnostic>& diags);
Scenario parse_scenario_file(const std::string& path,
                             std::vector<Diagnostic>& diags);

// Cross-field physics checks: frame budget vs round trip, Nyquist for
// configured tones, reflector separation vs sample period, analysis
// positions and sources, fbg geometry. Pure; never touches the filesystem.
void check_scenario(const Scenario& sc, std::vector<Diagnostic>& diags);

// parse + check in one step; throws ScenarioError when anything fails.
Scenario load_scenario(const std::string& path);

// Like load_scenario, but never throws on scenario problems: structural
// failures (unreadable file, JSON syntax) become error diagnostics too, and
// field diagnostics get source lines attached. For the `validate` subcommand.
std::vector<Diagnostic> validate_file(const std::string& path);

// Attach a best-effort source line (first occurrence of the quoted field
// name in `text`) to every diagnostic that does not carry one yet.
void annotate_lines(const std::string& text, std::vector<Diagnostic>& diags);

// Trace bin a fiber position maps to (round-trip delay on the sample grid).
std::size_t position_bin(const FiberSpec& fiber, double sample_rate_hz,
                         double position_m);

struct RunOverrides {
  bool has_frames = false;
  std::size_t frames = 0;
  bool has_seed = false;
  std::uint64_t seed = 0;
};
Scenario apply_overrides(Scenario sc, const RunOverrides& ov);

// Everything derived from one run. `traces` are the frames after the
// float32 archive round trip, so `analyze` on the written archive
// reproduces every downstream number bit for bit.
struct RunResult {
  std::vector<CorrTrace> traces;
  CorrTrace averaged;
  Fingerprint fp;
  std::vector<Peak> peaks;
  std::map<std::string, TimeSeries> series;
  std::map<std::string, ToneReport> tones;
  std::map<std::string, FbgSweepResult> sweeps;
};

// Building blocks, exposed for the CLI and for tests.
std::vector<CorrTrace> synthesize_frames(const Scenario& sc);
TraceArchive archive_from_traces(const std::vector<CorrTrace>& traces,
                                 double sample_rate_hz);
std::vector<CorrTrace> traces_from_archive(const TraceArchive& archive,
                                           double frame_rate_hz);
RunResult analyze_traces(const Scenario& sc, std::vector<CorrTrace> traces);

// Synthesize, archive, analyze, and write traces.cotd, fingerprint.csv, one
// CSV per analysis, and report.txt under out_dir. Throws NumericalError if
// any output value is non-finite (nothing is written in that case).
RunResult run_scenario(const Scenario& sc, const std::string& out_dir);

// Re-run the analyses against an existing archive; writes the same files
// as run_scenario except traces.cotd.
RunResult analyze_archive(const Scenario& sc, const std::string& archive_path,
                          const std::string& out_dir);

// Synthesize and write only fingerprint.csv; returns the full result so
// callers can print the detected peaks.
RunResult run_fingerprint(const Scenario& sc, const std::string& out_dir);

} // namespace cotdr
