#include "cotdr/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "cotdr/textio.hpp"

namespace cotdr {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------- parsing

std::string leaf_of(const std::string& path) {
  const auto dot = path.find_last_of('.');
  std::string leaf = dot == std::string::npos ? path : path.substr(dot + 1);
  const auto bracket = leaf.find('[');
  if (bracket != std::string::npos) leaf = leaf.substr(0, bracket);
  return leaf;
}

// Best-effort source location: first occurrence of the quoted key. Repeated
// keys in different sections may resolve to the earlier one.
int line_of_key(const std::string& text, const std::string& leaf) {
  if (leaf.empty()) return 0;
  const auto pos = text.find("\"" + leaf + "\"");
  if (pos == std::string::npos) return 0;
  const auto upto = text.begin() + static_cast<std::ptrdiff_t>(pos);
  return 1 + static_cast<int>(std::count(text.begin(), upto, '\n'));
}

struct ParseCtx {
  std::vector<Diagnostic>* diags;
  const std::string* text;

  void error(const std::string& path, const std::string& message) {
    diags->push_back({Diagnostic::Severity::Error, path,
                      text ? line_of_key(*text, leaf_of(path)) : 0, message});
  }
};

// Typed field access over one JSON object. Problems become diagnostics and
// the caller keeps its default value, so a single pass reports everything.
// finish() flags keys nothing asked for, catching misspelled fields.
class ObjReader {
public:
  ObjReader(const json& j, std::string path, ParseCtx& ctx)
      : j_(j), path_(std::move(path)), ctx_(ctx) {}

  std::string sub(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  void error(const std::string& key, const std::string& msg) {
    ctx_.error(sub(key), msg);
  }

  bool number(const char* key, double* out, bool required = false) {
    const json* v = get(key, required, "number");
    if (!v) return false;
    if (!v->is_number()) {
      error(key, "must be a number");
      return false;
    }
    *out = v->get<double>();
    return true;
  }

  bool integer(const char* key, std::int64_t* out, bool required = false) {
    const json* v = get(key, required, "integer");
    if (!v) return false;
    if (!v->is_number_integer() && !v->is_number_unsigned()) {
      error(key, "must be an integer");
      return false;
    }
    *out = v->get<std::int64_t>();
    return true;
  }

  bool uinteger(const char* key, std::uint64_t* out, bool required = false) {
    const json* v = get(key, required, "integer");
    if (!v) return false;
    const bool ok = v->is_number_unsigned() ||
                    (v->is_number_integer() && v->get<std::int64_t>() >= 0);
    if (!ok) {
      error(key, "must be a non-negative integer");
      return false;
    }
    *out = v->get<std::uint64_t>();
    return true;
  }

  bool boolean(const char* key, bool* out, bool required = false) {
    const json* v = get(key, required, "boolean");
    if (!v) return false;
    if (!v->is_boolean()) {
      error(key, "must be a boolean");
      return false;
    }
    *out = v->get<bool>();
    return true;
  }

  bool string(const char* key, std::string* out, bool required = false) {
    const json* v = get(key, required, "string");
    if (!v) return false;
    if (!v->is_string()) {
      error(key, "must be a string");
      return false;
    }
    *out = v->get<std::string>();
    return true;
  }

  bool number_array(const char* key, std::vector<double>* out,
                    bool required = false) {
    const json* v = get(key, required, "array of numbers");
    if (!v) return false;
    if (!v->is_array()) {
      error(key, "must be an array of numbers");
      return false;
    }
    std::vector<double> vals;
    vals.reserve(v->size());
    for (const json& e : *v) {
      if (!e.is_number()) {
        error(key, "must be an array of numbers");
        return false;
      }
      vals.push_back(e.get<double>());
    }
    *out = std::move(vals);
    return true;
  }

  const json* array(const char* key, bool required = false) {
    const json* v = get(key, required, "array");
    if (!v) return nullptr;
    if (!v->is_array()) {
      error(key, "must be an array");
      return nullptr;
    }
    return v;
  }

  const json* object(const char* key, bool required = false) {
    const json* v = get(key, required, "object");
    if (!v) return nullptr;
    if (!v->is_object()) {
      error(key, "must be an object");
      return nullptr;
    }
    return v;
  }

  void finish() {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) error(item.key(), "unknown field");
    }
  }

private:
  const json* get(const char* key, bool required, const char* want) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) {
      if (required) error(key, std::string("missing required ") + want);
      return nullptr;
    }
    return &*it;
  }

  const json& j_;
  std::string path_;
  ParseCtx& ctx_;
  std::set<std::string> seen_;
};

struct Choice {
  const char* name;
  int value;
};

bool parse_choice(ObjReader& r, const char* key,
                  std::initializer_list<Choice> choices, int* out,
                  bool required = false) {
  std::string s;
  if (!r.string(key, &s, required)) return false;
  for (const Choice& c : choices) {
    if (s == c.name) {
      *out = c.value;
      return true;
    }
  }
  std::string allowed;
  for (const Choice& c : choices) {
    if (!allowed.empty()) allowed += ", ";
    allowed += c.name;
  }
  r.error(key, "must be one of: " + allowed);
  return false;
}

void parse_probe(const json& j, ParseCtx& ctx, ProbeSpec& p) {
  ObjReader r(j, "probe", ctx);
  std::int64_t iv = 0;
  if (r.integer("prbs_order", &iv)) p.prbs_order = static_cast<int>(iv);
  r.boolean("extended", &p.extended);
  int m = static_cast<int>(p.modulation);
  if (parse_choice(r, "modulation",
                   {{"ook", static_cast<int>(Modulation::Ook)},
                    {"bpsk", static_cast<int>(Modulation::Bpsk)}},
                   &m)) {
    p.modulation = static_cast<Modulation>(m);
  }
  r.number("bit_rate_hz", &p.bit_rate_hz);
  if (r.integer("samples_per_bit", &iv)) p.samples_per_bit = static_cast<int>(iv);
  r.number("wavelength_m", &p.wavelength_m);
  r.number("frame_period_s", &p.frame_period_s);
  r.finish();
}

void parse_fiber(const json& j, ParseCtx& ctx, FiberSpec& f) {
  ObjReader r(j, "fiber", ctx);
  r.number("length_m", &f.length_m);
  r.number("attenuation_db_per_km", &f.attenuation_db_per_km);
  r.number("group_index", &f.group_index);
  r.number("backscatter_db_per_m", &f.backscatter_db_per_m);
  r.number("scatterer_spacing_m", &f.scatterer_spacing_m);
  r.number("thermal_coeff_ps_per_k_km", &f.thermal_coeff_ps_per_k_km);
  r.uinteger("rng_seed", &f.rng_seed);
  if (const json* arr = r.array("reflectors")) {
    f.reflectors.clear();
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const std::string path = "fiber.reflectors[" + std::to_string(i) + "]";
      const json& el = (*arr)[i];
      if (!el.is_object()) {
        ctx.error(path, "must be an object");
        continue;
      }
      ObjReader rr(el, path, ctx);
      Reflector refl;
      rr.number("position_m", &refl.position_m, true);
      rr.number("return_loss_db", &refl.return_loss_db, true);
      rr.finish();
      f.reflectors.push_back(refl);
    }
  }
  r.finish();
}

void parse_perturbation(const json& j, const std::string& path, ParseCtx& ctx,
                        std::vector<Perturbation>& out) {
  if (!j.is_object()) {
    ctx.error(path, "must be an object");
    return;
  }
  ObjReader r(j, path, ctx);
  int kind = -1;
  parse_choice(r, "kind",
               {{"acoustic_tone", 0}, {"temperature_step", 1},
                {"temperature_series", 2}},
               &kind, true);
  if (kind < 0) return; // without a kind the remaining fields are undecidable

  Perturbation p;
  r.number("center_m", &p.center_m, true);
  r.number("extent_m", &p.extent_m, true);
  switch (kind) {
    case 0:
      p.kind = Perturbation::Kind::AcousticTone;
      r.number("frequency_hz", &p.frequency_hz, true);
      r.number("index_amplitude", &p.index_amplitude, true);
      break;
    case 1:
      p.kind = Perturbation::Kind::TemperatureStep;
      r.number("delta_t_kelvin", &p.delta_t_kelvin, true);
      r.number("step_time_s", &p.step_time_s);
      break;
    default: {
      p.kind = Perturbation::Kind::TemperatureSeries;
      TimeSeries air;
      air.label = "air_delta_t_kelvin";
      r.number("t0_s", &air.t0_s);
      r.number("dt_s", &air.dt_s, true);
      r.number_array("temps_kelvin", &air.values, true);
      double lag_tau = 0.0;
      const bool lagged = r.number("lag_tau_s", &lag_tau);
      if (lagged && !(lag_tau > air.dt_s)) {
        r.error("lag_tau_s", "must exceed dt_s for a stable first-order lag");
        p.temperature = air;
      } else if (lagged && air.dt_s > 0.0 && !air.values.empty()) {
        p.temperature = thermal_lag(air, lag_tau);
      } else {
        p.temperature = air;
      }
      break;
    }
  }
  r.finish();
  out.push_back(std::move(p));
}

void parse_detection(const json& j, ParseCtx& ctx, DetectionConfig& d) {
  ObjReader r(j, "detection", ctx);
  int m = static_cast<int>(d.mode);
  if (parse_choice(r, "mode",
                   {{"direct", static_cast<int>(DetectionMode::Direct)},
                    {"coherent", static_cast<int>(DetectionMode::Coherent)}},
                   &m)) {
    d.mode = static_cast<DetectionMode>(m);
  }
  r.number("thermal_noise_sigma", &d.thermal_noise_sigma);
  r.number("lo_linewidth_hz", &d.lo_linewidth_hz);
  r.number("lo_power_gain", &d.lo_power_gain);
  std::int64_t iv = 0;
  if (r.integer("adc_bits", &iv)) d.adc_bits = static_cast<int>(iv);
  r.number("adc_full_scale", &d.adc_full_scale);
  if (r.integer("num_averages", &iv)) d.num_averages = static_cast<int>(iv);
  r.finish();
}

const char* kind_name(AnalysisDirective::Kind k) {
  switch (k) {
    case AnalysisDirective::Kind::Rtt: return "rtt";
    case AnalysisDirective::Kind::Amplitude: return "amplitude";
    case AnalysisDirective::Kind::Phase: return "phase";
    case AnalysisDirective::Kind::Tone: return "tone";
    case AnalysisDirective::Kind::Temp: return "temp";
    case AnalysisDirective::Kind::Fbg: return "fbg";
  }
  return "?";
}

void parse_analysis(const json& j, const std::string& path, ParseCtx& ctx,
                    std::vector<AnalysisDirective>& out) {
  if (!j.is_object()) {
    ctx.error(path, "must be an object");
    return;
  }
  ObjReader r(j, path, ctx);
  int kind = -1;
  parse_choice(r, "kind",
               {{"rtt", 0}, {"amplitude", 1}, {"phase", 2}, {"tone", 3},
                {"temp", 4}, {"fbg", 5}},
               &kind, true);
  if (kind < 0) return;

  AnalysisDirective a;
  a.kind = static_cast<AnalysisDirective::Kind>(kind);
  a.name = kind_name(a.kind);
  r.string("name", &a.name);
  switch (a.kind) {
    case AnalysisDirective::Kind::Rtt:
      r.number("input_m", &a.input_m);
      r.number("output_m", &a.output_m);
      break;
    case AnalysisDirective::Kind::Amplitude:
      r.number("position_m", &a.position_m, true);
      break;
    case AnalysisDirective::Kind::Phase:
      r.number("position_a_m", &a.position_a_m, true);
      r.number("position_b_m", &a.position_b_m, true);
      break;
    case AnalysisDirective::Kind::Tone:
      r.string("source", &a.source, true);
      r.number("f_min_hz", &a.f_min_hz, true);
      r.number("f_max_hz", &a.f_max_hz, true);
      break;
    case AnalysisDirective::Kind::Temp:
      r.string("source", &a.source, true);
      r.number("section_km", &a.section_km, true);
      r.number("coeff_ps_per_k_km", &a.coeff_ps_per_k_km);
      break;
    case AnalysisDirective::Kind::Fbg:
      break;
  }
  r.finish();
  out.push_back(std::move(a));
}

void parse_fbg(const json& j, ParseCtx& ctx, FbgScenario& f) {
  ObjReader r(j, "fbg", ctx);
  std::int64_t iv = 0;
  if (r.integer("num_gratings", &iv)) {
    if (iv < 1) {
      r.error("num_gratings", "must be at least 1");
    } else {
      f.num_gratings = static_cast<std::size_t>(iv);
    }
  }
  r.number("spacing_m", &f.spacing_m);
  r.number("fwhm_m", &f.fwhm_m);
  r.number("sweep_start_m", &f.sweep_start_m);
  r.number("sweep_stop_m", &f.sweep_stop_m);
  r.number("sweep_step_m", &f.sweep_step_m);
  r.number("peak_return_loss_db", &f.peak_return_loss_db);
  r.number("group_index", &f.group_index);
  r.number("lead_in_m", &f.lead_in_m);
  r.number("backscatter_db_per_m", &f.backscatter_db_per_m);
  r.uinteger("rng_seed", &f.rng_seed);

  // Grating centers: either an explicit list or a base wavelength with an
  // optional sinusoidal detuning along the array.
  std::vector<double> listed;
  const bool have_list = r.number_array("center_wavelengths_m", &listed);
  double base = 0.0;
  const bool have_base = r.number("center_wavelength_m", &base);
  double detune_amp = 0.0, detune_period = 0.0;
  const bool have_detune = r.number("detune_amplitude_m", &detune_amp);
  r.number("detune_period_m", &detune_period);

  if (have_list && have_base) {
    r.error("center_wavelength_m",
            "give either center_wavelength_m or center_wavelengths_m, not both");
  }
  if (have_list) {
    f.center_wavelengths_m = std::move(listed);
  } else if (have_base) {
    if (have_detune && detune_amp != 0.0 && !(detune_period > 0.0)) {
      r.error("detune_period_m", "required when detune_amplitude_m is set");
      detune_amp = 0.0;
    }
    f.center_wavelengths_m.resize(f.num_gratings);
    for (std::size_t i = 0; i < f.num_gratings; ++i) {
      const double z = static_cast<double>(i) * f.spacing_m;
      const double detune =
          detune_amp != 0.0
              ? detune_amp * std::sin(2.0 * M_PI * z / detune_period)
              : 0.0;
      f.center_wavelengths_m[i] = base + detune;
    }
  } else {
    r.error("center_wavelength_m",
            "missing grating centers: give center_wavelength_m or "
            "center_wavelengths_m");
  }
  r.finish();
}

// ------------------------------------------------------------- validation

// Frame geometry as the engine will derive it; `usable` is false when the
// inputs are already too broken to reason about sizes.
struct Geometry {
  bool usable = false;
  double fs = 0.0;
  std::size_t ref_len = 0;
  std::size_t taps = 0;
  std::size_t frame_len = 0;
  std::size_t trace_len = 0;
  double rtt_total_s = 0.0;
  double min_frame_s = 0.0;
};

Geometry derive_geometry(const Scenario& sc) {
  Geometry g;
  const ProbeSpec& p = sc.probe;
  const FiberSpec& f = sc.fiber;
  if (p.prbs_order < 2 || p.prbs_order > 16 || p.samples_per_bit < 1 ||
      !(p.bit_rate_hz > 0.0) || !(f.length_m > 0.0) || f.group_index < 1.4 ||
      f.group_index > 1.6) {
    return g;
  }
  g.fs = p.sample_rate_hz();
  g.ref_len = p.sequence_bits() * static_cast<std::size_t>(p.samples_per_bit);
  const double sample_period = 1.0 / g.fs;
  g.rtt_total_s = 2.0 * f.group_index * f.length_m / kSpeedOfLight;
  g.taps = static_cast<std::size_t>(
      std::max(1.0, std::ceil(g.rtt_total_s / sample_period)));
  g.frame_len = p.frame_period_s > 0.0
                    ? static_cast<std::size_t>(
                          std::llround(p.frame_period_s * g.fs))
                    : g.ref_len + g.taps - 1;
  g.trace_len = g.frame_len >= g.ref_len ? g.frame_len - g.ref_len + 1 : 0;
  g.min_frame_s = static_cast<double>(g.ref_len + g.taps - 1) / g.fs;
  g.usable = true;
  return g;
}

bool name_is_safe(const std::string& name) {
  if (name.empty()) return false;
  for (const char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

// rtt endpoints default to the first and last reflector along the fiber.
bool resolve_rtt_endpoints(const Scenario& sc, const AnalysisDirective& a,
                           double* in_m, double* out_m) {
  *in_m = a.input_m;
  *out_m = a.output_m;
  if (*in_m >= 0.0 && *out_m >= 0.0) return true;
  if (sc.fiber.reflectors.empty()) return false;
  double lo = sc.fiber.reflectors.front().position_m;
  double hi = lo;
  for (const Reflector& r : sc.fiber.reflectors) {
    lo = std::min(lo, r.position_m);
    hi = std::max(hi, r.position_m);
  }
  if (*in_m < 0.0) *in_m = lo;
  if (*out_m < 0.0) *out_m = hi;
  return *in_m != *out_m;
}

std::string fmt(double v) { return format_double(v); }

} // namespace

std::string to_string(const Diagnostic& d) {
  std::ostringstream os;
  os << (d.severity == Diagnostic::Severity::Error ? "error" : "warning")
     << ": ";
  if (d.line > 0) os << "line " << d.line << ": ";
  if (!d.path.empty()) os << d.path << ": ";
  os << d.message;
  return os.str();
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.severity == Diagnostic::Severity::Error;
  });
}

Scenario parse_scenario(const std::string& text,
                        std::vector<Diagnostic>& diags) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(e.what()); // message carries line and column
  }
  if (!doc.is_object()) throw ScenarioError("scenario must be a JSON object");

  ParseCtx ctx{&diags, &text};
  Scenario sc;
  ObjReader top(doc, "", ctx);
  top.string("name", &sc.name);
  top.string("description", &sc.description);
  top.uinteger("seed", &sc.seed);
  std::int64_t iv = 0;
  if (top.integer("frames", &iv)) {
    if (iv < 0) {
      top.error("frames", "must be non-negative");
    } else {
      sc.frames = static_cast<std::size_t>(iv);
    }
  }
  top.number("frame_rate_hz", &sc.frame_rate_hz);
  top.number("peak_threshold_db", &sc.peak_threshold_db);
  if (const json* j = top.object("probe")) parse_probe(*j, ctx, sc.probe);
  if (const json* j = top.object("fiber")) parse_fiber(*j, ctx, sc.fiber);
  if (const json* arr = top.array("perturbations")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      parse_perturbation((*arr)[i], "perturbations[" + std::to_string(i) + "]",
                         ctx, sc.perturbations);
    }
  }
  if (const json* j = top.object("detection")) {
    parse_detection(*j, ctx, sc.detection);
  }
  if (const json* arr = top.array("analyses")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      parse_analysis((*arr)[i], "analyses[" + std::to_string(i) + "]", ctx,
                     sc.analyses);
    }
  }
  if (const json* j = top.object("fbg")) {
    sc.has_fbg = true;
    parse_fbg(*j, ctx, sc.fbg);
  }
  top.finish();
  return sc;
}

Scenario parse_scenario_file(const std::string& path,
                             std::vector<Diagnostic>& diags) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), diags);
}

void check_scenario(const Scenario& sc, std::vector<Diagnostic>& diags) {
  ParseCtx ctx{&diags, nullptr};
  auto err = [&](const std::string& path, const std::string& msg) {
    ctx.error(path, msg);
  };
  auto warn = [&](const std::string& path, const std::string& msg) {
    diags.push_back({Diagnostic::Severity::Warning, path, 0, msg});
  };

  const ProbeSpec& p = sc.probe;
  if (p.prbs_order < 2 || p.prbs_order > 16) {
    err("probe.prbs_order", "outside the supported range 2..16");
  }
  if (p.samples_per_bit < 1) err("probe.samples_per_bit", "must be at least 1");
  if (!(p.bit_rate_hz > 0.0)) err("probe.bit_rate_hz", "must be positive");
  if (!(p.wavelength_m > 0.0)) err("probe.wavelength_m", "must be positive");
  if (p.frame_period_s < 0.0) err("probe.frame_period_s", "must not be negative");

  const FiberSpec& f = sc.fiber;
  if (!(f.length_m > 0.0)) err("fiber.length_m", "must be positive");
  if (f.group_index < 1.4 || f.group_index > 1.6) {
    err("fiber.group_index", "outside [1.4, 1.6]");
  }
  if (f.backscatter_db_per_m >= 0.0) {
    err("fiber.backscatter_db_per_m", "must be negative (a loss in dB/m)");
  }
  if (f.attenuation_db_per_km < 0.0) {
    err("fiber.attenuation_db_per_km", "must not be negative");
  }
  if (!(f.thermal_coeff_ps_per_k_km > 0.0)) {
    err("fiber.thermal_coeff_ps_per_k_km", "must be positive");
  }
  if (f.scatterer_spacing_m < 0.0) {
    err("fiber.scatterer_spacing_m", "must not be negative");
  }
  for (std::size_t i = 0; i < f.reflectors.size(); ++i) {
    const Reflector& r = f.reflectors[i];
    const std::string path = "fiber.reflectors[" + std::to_string(i) + "]";
    if (f.length_m > 0.0 &&
        (r.position_m <= 0.0 || r.position_m >= f.length_m)) {
      err(path + ".position_m", "not strictly inside the fiber");
    }
    if (!(r.return_loss_db > 0.0)) {
      err(path + ".return_loss_db", "must be positive");
    }
  }

  const DetectionConfig& d = sc.detection;
  if (d.thermal_noise_sigma < 0.0) {
    err("detection.thermal_noise_sigma", "must not be negative");
  }
  if (d.lo_linewidth_hz < 0.0) {
    err("detection.lo_linewidth_hz", "must not be negative");
  }
  if (!(d.lo_power_gain > 0.0)) {
    err("detection.lo_power_gain", "must be positive");
  }
  if (d.adc_bits < 1 || d.adc_bits > 16) {
    err("detection.adc_bits", "outside the supported range 1..16");
  }
  if (!(d.adc_full_scale > 0.0)) {
    err("detection.adc_full_scale", "must be positive");
  }
  if (d.num_averages < 1) err("detection.num_averages", "must be at least 1");
  if (d.mode == DetectionMode::Direct && p.modulation == Modulation::Bpsk) {
    warn("detection.mode",
         "direct detection squares away bpsk polarity; the correlator will "
         "not see the sequence");
  }

  if (sc.frames < 1) err("frames", "must be at least 1");
  if (sc.frame_rate_hz < 0.0) err("frame_rate_hz", "must not be negative");
  if (sc.peak_threshold_db <= 0.0) {
    err("peak_threshold_db", "must be positive");
  }

  const Geometry g = derive_geometry(sc);
  if (g.usable) {
    // One frame must hold the sequence plus the full fiber round trip.
    if (p.frame_period_s > 0.0 &&
        p.frame_period_s < p.sequence_duration_s() + g.rtt_total_s) {
      err("probe.frame_period_s",
          "shorter than sequence duration plus fiber round trip (" +
              fmt(p.sequence_duration_s() + g.rtt_total_s) + " s)");
    }
    const double effective_frame_s =
        p.frame_period_s > 0.0 ? p.frame_period_s : g.min_frame_s;
    if (sc.frame_rate_hz > 0.0 &&
        1.0 / sc.frame_rate_hz < effective_frame_s) {
      err("frame_rate_hz", "frame interval shorter than one frame (" +
                               fmt(effective_frame_s) + " s)");
    }
    // Reflectors closer than one sample period land in a shared delay bin.
    std::vector<double> delays;
    delays.reserve(f.reflectors.size());
    for (const Reflector& r : f.reflectors) {
      if (r.position_m > 0.0 && r.position_m < f.length_m) {
        delays.push_back(2.0 * f.group_index * r.position_m / kSpeedOfLight);
      }
    }
    std::sort(delays.begin(), delays.end());
    for (std::size_t i = 1; i < delays.size(); ++i) {
      // Slight slack so a spacing of exactly one sample survives rounding.
      if (delays[i] - delays[i - 1] < (1.0 - 1e-9) / g.fs) {
        err("fiber.reflectors",
            "sample period cannot separate reflectors " + fmt(delays[i - 1]) +
                " s and " + fmt(delays[i]) + " s apart in round trip");
        break;
      }
    }
  }
  if (sc.frames > 1 && !(sc.frame_rate_hz > 0.0)) {
    err("frame_rate_hz", "required when frames > 1");
  }

  for (std::size_t i = 0; i < sc.perturbations.size(); ++i) {
    const Perturbation& pt = sc.perturbations[i];
    const std::string path = "perturbations[" + std::to_string(i) + "]";
    if (!(pt.extent_m > 0.0)) err(path + ".extent_m", "must be positive");
    const double lo = pt.center_m - pt.extent_m / 2.0;
    const double hi = pt.center_m + pt.extent_m / 2.0;
    if (f.length_m > 0.0 && (lo < 0.0 || hi > f.length_m)) {
      err(path + ".center_m", "perturbed section extends outside the fiber");
    }
    switch (pt.kind) {
      case Perturbation::Kind::AcousticTone: {
        if (!(pt.frequency_hz > 0.0)) {
          err(path + ".frequency_hz", "must be positive");
        }
        if (pt.index_amplitude < 0.0) {
          err(path + ".index_amplitude", "must not be negative");
        }
        if (sc.frames > 1 && sc.frame_rate_hz > 0.0) {
          if (pt.frequency_hz >= sc.frame_rate_hz / 2.0) {
            err(path + ".frequency_hz",
                "at or above the Nyquist rate of frame_rate_hz");
          } else if (p.wavelength_m > 0.0 && pt.extent_m > 0.0) {
            // Largest frame-to-frame step of the doubled round-trip phase;
            // past pi the unwrapped series is ambiguous.
            const double phi_one_way =
                2.0 * M_PI * pt.index_amplitude * pt.extent_m / p.wavelength_m;
            const double step =
                4.0 * phi_one_way *
                std::sin(M_PI * pt.frequency_hz / sc.frame_rate_hz);
            if (step >= M_PI) {
              err(path + ".index_amplitude",
                  "phase step between frames reaches " + fmt(step) +
                      " rad (>= pi); raise frame_rate_hz or lower the "
                      "amplitude");
            }
          }
        }
        break;
      }
      case Perturbation::Kind::TemperatureStep:
        if (pt.step_time_s < 0.0) {
          err(path + ".step_time_s", "must not be negative");
        }
        break;
      case Perturbation::Kind::TemperatureSeries:
        if (pt.temperature.values.empty()) {
          err(path + ".temps_kelvin", "must not be empty");
        }
        if (!(pt.temperature.dt_s > 0.0)) {
          err(path + ".dt_s", "must be positive");
        }
        break;
    }
  }

  // Analyses: names must be unique and filesystem-safe; sources must refer
  // to an earlier series-producing analysis.
  std::map<std::string, AnalysisDirective::Kind> earlier;
  bool fbg_requested = false;
  for (std::size_t i = 0; i < sc.analyses.size(); ++i) {
    const AnalysisDirective& a = sc.analyses[i];
    const std::string path = "analyses[" + std::to_string(i) + "]";
    if (!name_is_safe(a.name)) {
      err(path + ".name", "must be non-empty, lowercase [a-z0-9_]");
    } else if (earlier.count(a.name)) {
      err(path + ".name", "duplicate analysis name '" + a.name + "'");
    }

    const bool needs_series = a.kind == AnalysisDirective::Kind::Rtt ||
                              a.kind == AnalysisDirective::Kind::Amplitude ||
                              a.kind == AnalysisDirective::Kind::Phase;
    if (needs_series && sc.frames < 2) {
      err(path, "needs at least two frames to form a series");
    }

    auto check_position = [&](const char* field, double pos) {
      if (!(f.length_m > 0.0)) return;
      if (pos < 0.0 || pos > f.length_m) {
        err(path + "." + field, "outside the fiber [0, " + fmt(f.length_m) +
                                    "] m");
        return;
      }
      if (g.usable) {
        const std::size_t bin = position_bin(f, g.fs, pos);
        if (bin >= g.trace_len) {
          err(path + "." + field, "maps to trace bin " + std::to_string(bin) +
                                      " beyond the correlated trace (" +
                                      std::to_string(g.trace_len) + " bins)");
        }
      }
    };

    switch (a.kind) {
      case AnalysisDirective::Kind::Rtt: {
        double in_m = 0.0, out_m = 0.0;
        if (!resolve_rtt_endpoints(sc, a, &in_m, &out_m)) {
          err(path, "default endpoints need two reflectors; set input_m and "
                    "output_m");
        } else {
          check_position("input_m", in_m);
          check_position("output_m", out_m);
        }
        break;
      }
      case AnalysisDirective::Kind::Amplitude:
        check_position("position_m", a.position_m);
        break;
      case AnalysisDirective::Kind::Phase:
        check_position("position_a_m", a.position_a_m);
        check_position("position_b_m", a.position_b_m);
        if (sc.detection.mode != DetectionMode::Coherent) {
          err(path, "phase readout requires coherent detection");
        }
        if (sc.detection.num_averages != 1) {
          err(path, "phase readout requires num_averages = 1 (averaged "
                    "repetitions have independent oscillator phases)");
        }
        break;
      case AnalysisDirective::Kind::Tone: {
        const auto it = earlier.find(a.source);
        if (it == earlier.end() ||
            it->second == AnalysisDirective::Kind::Tone ||
            it->second == AnalysisDirective::Kind::Fbg) {
          err(path + ".source",
              "must name an earlier series analysis (rtt, amplitude, phase "
              "or temp)");
        }
        if (!(a.f_min_hz > 0.0) || !(a.f_max_hz > a.f_min_hz)) {
          err(path + ".f_min_hz", "need 0 < f_min_hz < f_max_hz");
        } else if (sc.frame_rate_hz > 0.0) {
          if (a.f_max_hz > sc.frame_rate_hz / 2.0) {
            err(path + ".f_max_hz", "beyond the Nyquist rate of frame_rate_hz");
          }
          const double duration =
              static_cast<double>(sc.frames) / sc.frame_rate_hz;
          if (duration < 2.0 / a.f_min_hz) {
            err(path + ".f_min_hz",
                "observation shorter than two periods of f_min_hz");
          }
        }
        break;
      }
      case AnalysisDirective::Kind::Temp: {
        const auto it = earlier.find(a.source);
        if (it == earlier.end() || it->second != AnalysisDirective::Kind::Rtt) {
          err(path + ".source", "must name an earlier rtt analysis");
        }
        if (!(a.section_km > 0.0)) err(path + ".section_km", "must be positive");
        if (!(a.coeff_ps_per_k_km > 0.0)) {
          err(path + ".coeff_ps_per_k_km", "must be positive");
        }
        break;
      }
      case AnalysisDirective::Kind::Fbg:
        fbg_requested = true;
        if (!sc.has_fbg) err(path, "scenario has no fbg section");
        if (sc.detection.mode != DetectionMode::Coherent) {
          err(path, "grating interrogation requires coherent detection");
        }
        break;
    }
    if (name_is_safe(a.name)) earlier[a.name] = a.kind;
  }

  if (sc.has_fbg) {
    const FbgScenario& fb = sc.fbg;
    if (fb.num_gratings < 1) err("fbg.num_gratings", "must be at least 1");
    if (!(fb.spacing_m > 0.0)) err("fbg.spacing_m", "must be positive");
    if (!(fb.fwhm_m > 0.0)) err("fbg.fwhm_m", "must be positive");
    if (!(fb.sweep_step_m > 0.0)) err("fbg.sweep_step_m", "must be positive");
    if (!(fb.sweep_stop_m > fb.sweep_start_m)) {
      err("fbg.sweep_stop_m", "must exceed sweep_start_m");
    }
    if (!(fb.lead_in_m > 0.0)) err("fbg.lead_in_m", "must be positive");
    if (fb.group_index < 1.4 || fb.group_index > 1.6) {
      err("fbg.group_index", "outside [1.4, 1.6]");
    }
    if (fb.backscatter_db_per_m >= 0.0) {
      err("fbg.backscatter_db_per_m", "must be negative (a loss in dB/m)");
    }
    if (!(fb.peak_return_loss_db > 0.0)) {
      err("fbg.peak_return_loss_db", "must be positive");
    }
    if (fb.center_wavelengths_m.size() != fb.num_gratings) {
      err("fbg.center_wavelengths_m",
          "needs one entry per grating (" + std::to_string(fb.num_gratings) +
              ")");
    } else {
      for (std::size_t i = 0; i < fb.center_wavelengths_m.size(); ++i) {
        const double c = fb.center_wavelengths_m[i];
        if (!(c > 0.0)) {
          err("fbg.center_wavelengths_m",
              "grating " + std::to_string(i) + " center must be positive");
        } else if (fb.sweep_stop_m > fb.sweep_start_m &&
                   (c < fb.sweep_start_m || c > fb.sweep_stop_m)) {
          warn("fbg.center_wavelengths_m",
               "grating " + std::to_string(i) + " center lies outside the "
               "sweep span");
        }
      }
    }
    if (fb.spacing_m > 0.0 && fb.num_gratings > 1 && p.bit_rate_hz > 0.0 &&
        p.samples_per_bit >= 1 && fb.group_index >= 1.4 &&
        fb.group_index <= 1.6) {
      // Mirror the sweep's delay-bin mapping to catch unresolved gratings.
      const double fs = p.sample_rate_hz();
      long long prev = 0;
      for (std::size_t i = 0; i < fb.num_gratings; ++i) {
        const double z =
            fb.lead_in_m + static_cast<double>(i) * fb.spacing_m;
        const double tau = 2.0 * fb.group_index * z / kSpeedOfLight;
        const long long bin = std::llround(tau * fs);
        if (i > 0 && bin == prev) {
          err("fbg.spacing_m", "gratings " + std::to_string(i - 1) + " and " +
                                   std::to_string(i) +
                                   " share delay bin " + std::to_string(bin));
          break;
        }
        prev = bin;
      }
    }
    if (!fbg_requested) {
      warn("fbg", "section present but no fbg analysis requests it");
    }
  }
}

void annotate_lines(const std::string& text, std::vector<Diagnostic>& diags) {
  for (Diagnostic& d : diags) {
    if (d.line == 0) d.line = line_of_key(text, leaf_of(d.path));
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::vector<Diagnostic> diags;
  Scenario sc = parse_scenario(text, diags);
  check_scenario(sc, diags);
  annotate_lines(text, diags);
  if (has_errors(diags)) {
    std::ostringstream os;
    os << "invalid scenario " << path << ":";
    for (const Diagnostic& d : diags) os << '\n' << "  " << to_string(d);
    throw ScenarioError(os.str());
  }
  return sc;
}

std::vector<Diagnostic> validate_file(const std::string& path) {
  std::vector<Diagnostic> diags;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    diags.push_back({Diagnostic::Severity::Error, "", 0,
                     "cannot open scenario file: " + path});
    return diags;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  try {
    const Scenario sc = parse_scenario(text, diags);
    check_scenario(sc, diags);
  } catch (const ScenarioError& e) {
    diags.push_back({Diagnostic::Severity::Error, "", 0, e.what()});
    return diags;
  }
  annotate_lines(text, diags);
  return diags;
}

std::size_t position_bin(const FiberSpec& fiber, double sample_rate_hz,
                         double position_m) {
  if (!(sample_rate_hz > 0.0)) {
    throw std::invalid_argument("position_bin: sample rate must be positive");
  }
  const double tau = round_trip_delay(fiber, position_m);
  const double sample_period = 1.0 / sample_rate_hz;
  const long long k = std::llround(tau / sample_period);
  return k < 0 ? 0 : static_cast<std::size_t>(k);
}

Scenario apply_overrides(Scenario sc, const RunOverrides& ov) {
  if (ov.has_frames) sc.frames = ov.frames;
  if (ov.has_seed) sc.seed = ov.seed;
  return sc;
}

// ------------------------------------------------------------------ runs

std::vector<CorrTrace> synthesize_frames(const Scenario& sc) {
  EngineConfig cfg;
  cfg.probe = sc.probe;
  cfg.fiber = sc.fiber;
  cfg.perturbations = sc.perturbations;
  cfg.detection = sc.detection;
  cfg.frame_rate_hz = sc.frame_rate_hz;
  cfg.seed = sc.seed;
  FrameEngine engine(cfg);

  std::vector<CorrTrace> out;
  out.reserve(sc.frames);
  for (std::size_t k = 0; k < sc.frames; ++k) {
    out.push_back(engine.run_frame(k));
  }
  return out;
}

TraceArchive archive_from_traces(const std::vector<CorrTrace>& traces,
                                 double sample_rate_hz) {
  TraceArchive a;
  a.complex_frames = true;
  a.sample_rate_hz = sample_rate_hz;
  a.frame_len = traces.empty() ? 0 : traces.front().values.size();
  a.frames.reserve(traces.size());
  for (const CorrTrace& t : traces) {
    std::vector<cplx> q(t.values.size());
    for (std::size_t k = 0; k < t.values.size(); ++k) {
      q[k] = {TraceArchive::quantize(t.values[k].real()),
              TraceArchive::quantize(t.values[k].imag())};
    }
    a.frames.push_back(std::move(q));
  }
  return a;
}

std::vector<CorrTrace> traces_from_archive(const TraceArchive& archive,
                                           double frame_rate_hz) {
  const double dt = frame_rate_hz > 0.0 ? 1.0 / frame_rate_hz : 0.0;
  std::vector<CorrTrace> out;
  out.reserve(archive.frames.size());
  for (std::size_t k = 0; k < archive.frames.size(); ++k) {
    CorrTrace t;
    t.values = archive.frames[k];
    t.sample_period_s =
        archive.sample_rate_hz > 0.0 ? 1.0 / archive.sample_rate_hz : 0.0;
    t.epoch_s = static_cast<double>(k) * dt;
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

const TimeSeries& source_series(const RunResult& r,
                                const AnalysisDirective& a) {
  const auto it = r.series.find(a.source);
  if (it == r.series.end()) {
    throw std::runtime_error("analysis '" + a.name +
                             "': unknown source series '" + a.source + "'");
  }
  return it->second;
}

RunResult analyze_core(const Scenario& sc, std::vector<CorrTrace> traces,
                       bool with_analyses) {
  if (traces.empty()) {
    throw std::runtime_error("analyze: no frames to work with");
  }
  RunResult r;
  r.traces = std::move(traces);
  // Direct frames share a deterministic detector phase and may be averaged
  // coherently; coherent frames carry independent oscillator phases, so
  // only their powers stack.
  const AverageMode mode = sc.detection.mode == DetectionMode::Direct
                               ? AverageMode::Complex
                               : AverageMode::Power;
  r.averaged = r.traces.size() == 1 ? r.traces.front()
                                    : average(r.traces, mode);
  r.fp = fingerprint(r.averaged, sc.fiber.group_index);
  r.peaks = find_peaks(r.averaged, sc.peak_threshold_db);
  if (!with_analyses) return r;

  const double fs = sc.probe.sample_rate_hz();
  for (const AnalysisDirective& a : sc.analyses) {
    switch (a.kind) {
      case AnalysisDirective::Kind::Rtt: {
        double in_m = 0.0, out_m = 0.0;
        if (!resolve_rtt_endpoints(sc, a, &in_m, &out_m)) {
          throw std::runtime_error("analysis '" + a.name +
                                   "': cannot resolve rtt endpoints");
        }
        r.series[a.name] = rtt_series(r.traces,
                                      position_bin(sc.fiber, fs, in_m),
                                      position_bin(sc.fiber, fs, out_m));
        break;
      }
      case AnalysisDirective::Kind::Amplitude:
        r.series[a.name] =
            amplitude_series(r.traces, position_bin(sc.fiber, fs, a.position_m));
        break;
      case AnalysisDirective::Kind::Phase:
        r.series[a.name] =
            phase_series(r.traces, position_bin(sc.fiber, fs, a.position_a_m),
                         position_bin(sc.fiber, fs, a.position_b_m));
        break;
      case AnalysisDirective::Kind::Tone:
        r.tones[a.name] =
            tone_detect(source_series(r, a), a.f_min_hz, a.f_max_hz);
        break;
      case AnalysisDirective::Kind::Temp:
        r.series[a.name] = temp_estimate(source_series(r, a), a.section_km,
                                         a.coeff_ps_per_k_km);
        break;
      case AnalysisDirective::Kind::Fbg:
        r.sweeps[a.name] = fbg_sweep(sc.fbg, sc.probe, sc.detection);
        break;
    }
  }
  return r;
}

void ensure_finite(const RunResult& r) {
  const auto bad = [](double v) { return !std::isfinite(v); };
  for (std::size_t k = 0; k < r.traces.size(); ++k) {
    for (const cplx& v : r.traces[k].values) {
      if (bad(v.real()) || bad(v.imag())) {
        throw NumericalError("non-finite sample in trace frame " +
                             std::to_string(k));
      }
    }
  }
  for (const cplx& v : r.averaged.values) {
    if (bad(v.real()) || bad(v.imag())) {
      throw NumericalError("non-finite sample in the averaged trace");
    }
  }
  for (const double v : r.fp.power) {
    if (bad(v)) throw NumericalError("non-finite value in the fingerprint");
  }
  for (const auto& [name, s] : r.series) {
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      if (s.is_valid(k) && bad(s.values[k])) {
        throw NumericalError("non-finite value in series '" + name + "'");
      }
    }
  }
  for (const auto& [name, t] : r.tones) {
    if (bad(t.frequency_hz) || bad(t.amplitude) || bad(t.pp)) {
      throw NumericalError("non-finite value in tone report '" + name + "'");
    }
  }
  for (const auto& [name, s] : r.sweeps) {
    for (const auto& row : s.spectra) {
      for (const double v : row) {
        if (bad(v)) {
          throw NumericalError("non-finite value in fbg spectra '" + name +
                               "'");
        }
      }
    }
    for (const double v : s.fitted_centers_m) {
      if (bad(v)) {
        throw NumericalError("non-finite fitted center in fbg sweep '" + name +
                             "'");
      }
    }
  }
}

void open_out(std::ofstream& out, const std::string& path) {
  out.open(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
}

void close_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_fingerprint_csv(const std::string& path, const Fingerprint& fp) {
  std::ofstream out;
  open_out(out, path);
  out << "distance_m,power\n";
  for (std::size_t k = 0; k < fp.power.size(); ++k) {
    out << fmt(fp.distance_m[k]) << ',' << fmt(fp.power[k]) << '\n';
  }
  close_out(out, path);
}

void write_tone_csv(const std::string& path, const ToneReport& t) {
  std::ofstream out;
  open_out(out, path);
  out << "t_seconds,value,label\n";
  out << "0," << fmt(t.frequency_hz) << ",tone_frequency_hz\n";
  out << "0," << fmt(t.amplitude) << ",tone_amplitude\n";
  out << "0," << fmt(t.pp) << ",tone_pp\n";
  close_out(out, path);
}

void write_fbg_csvs(const std::string& dir, const AnalysisDirective& a,
                    const FbgScenario& f, const FbgSweepResult& s) {
  {
    const std::string path = dir + "/" + a.name + "_spectra.csv";
    std::ofstream out;
    open_out(out, path);
    out << "grating,wavelength_m,magnitude\n";
    for (std::size_t i = 0; i < s.spectra.size(); ++i) {
      for (std::size_t j = 0; j < s.spectra[i].size(); ++j) {
        out << i << ',' << fmt(s.wavelengths_m[j]) << ','
            << fmt(s.spectra[i][j]) << '\n';
      }
    }
    close_out(out, path);
  }
  {
    const std::string path = dir + "/" + a.name + "_centers.csv";
    std::ofstream out;
    open_out(out, path);
    out << "grating,position_m,bin,configured_center_m,fitted_center_m\n";
    for (std::size_t i = 0; i < s.fitted_centers_m.size(); ++i) {
      const double z = f.lead_in_m + static_cast<double>(i) * f.spacing_m;
      out << i << ',' << fmt(z) << ',' << s.grating_bins[i] << ','
          << fmt(f.center_wavelengths_m[i]) << ',' << fmt(s.fitted_centers_m[i])
          << '\n';
    }
    close_out(out, path);
  }
}

struct SeriesStats {
  std::size_t n = 0;
  double mean = 0.0;
  double sigma = 0.0;
  double pp = 0.0;
};

SeriesStats stats_of(const TimeSeries& s) {
  SeriesStats st;
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    if (!s.is_valid(k)) continue;
    const double v = s.values[k];
    if (st.n == 0) {
      lo = hi = v;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    st.mean += v;
    ++st.n;
  }
  if (st.n == 0) return st;
  st.mean /= static_cast<double>(st.n);
  double acc = 0.0;
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    if (!s.is_valid(k)) continue;
    const double d = s.values[k] - st.mean;
    acc += d * d;
  }
  st.sigma = std::sqrt(acc / static_cast<double>(st.n));
  st.pp = hi - lo;
  return st;
}

void write_report(const std::string& path, const Scenario& sc,
                  const RunResult& r) {
  std::ofstream out;
  open_out(out, path);
  const double fs = sc.probe.sample_rate_hz();
  out << "scenario: " << sc.name << '\n';
  out << "frames: " << r.traces.size() << '\n';
  out << "frame_rate_hz: " << fmt(sc.frame_rate_hz) << '\n';
  out << "detection: "
      << (sc.detection.mode == DetectionMode::Direct ? "direct" : "coherent")
      << '\n';
  out << "num_averages: " << sc.detection.num_averages << '\n';
  out << "sample_rate_hz: " << fmt(fs) << '\n';
  out << "trace_bins: " << r.averaged.values.size() << '\n';
  out << "peak_threshold_db: " << fmt(sc.peak_threshold_db) << '\n';
  out << "peaks: " << r.peaks.size() << '\n';
  for (std::size_t i = 0; i < r.peaks.size(); ++i) {
    const Peak& p = r.peaks[i];
    out << "peak " << i << ": bin " << p.bin << " distance_m "
        << fmt(r.fp.distance_m[p.bin]) << " magnitude " << fmt(p.magnitude)
        << " refined_delay_s " << fmt(p.refined_delay_s) << '\n';
  }
  for (const AnalysisDirective& a : sc.analyses) {
    out << "analysis " << a.name << ": kind " << kind_name(a.kind);
    switch (a.kind) {
      case AnalysisDirective::Kind::Rtt: {
        const SeriesStats st = stats_of(r.series.at(a.name));
        out << " frames_used " << st.n << " mean_s " << fmt(st.mean)
            << " sigma_s " << fmt(st.sigma);
        break;
      }
      case AnalysisDirective::Kind::Amplitude: {
        const SeriesStats st = stats_of(r.series.at(a.name));
        out << " bin " << position_bin(sc.fiber, fs, a.position_m)
            << " frames_used " << st.n << " mean_power " << fmt(st.mean)
            << " sigma_power " << fmt(st.sigma);
        break;
      }
      case AnalysisDirective::Kind::Phase: {
        const SeriesStats st = stats_of(r.series.at(a.name));
        out << " bin_a " << position_bin(sc.fiber, fs, a.position_a_m)
            << " bin_b " << position_bin(sc.fiber, fs, a.position_b_m)
            << " frames_used " << st.n << " mean_rad " << fmt(st.mean)
            << " pp_rad " << fmt(st.pp);
        break;
      }
      case AnalysisDirective::Kind::Tone: {
        const ToneReport& t = r.tones.at(a.name);
        out << " source " << a.source << " frequency_hz "
            << fmt(t.frequency_hz) << " amplitude " << fmt(t.amplitude)
            << " pp " << fmt(t.pp);
        break;
      }
      case AnalysisDirective::Kind::Temp: {
        const SeriesStats st = stats_of(r.series.at(a.name));
        const double se =
            st.n > 0 ? st.sigma / std::sqrt(static_cast<double>(st.n)) : 0.0;
        out << " source " << a.source << " frames_used " << st.n
            << " mean_delta_t_kelvin " << fmt(st.mean) << " se_kelvin "
            << fmt(se);
        break;
      }
      case AnalysisDirective::Kind::Fbg: {
        const FbgSweepResult& s = r.sweeps.at(a.name);
        bool regular = s.grating_bins.size() > 1;
        long long spacing = 0;
        for (std::size_t i = 1; i < s.grating_bins.size(); ++i) {
          const long long d =
              static_cast<long long>(s.grating_bins[i]) -
              static_cast<long long>(s.grating_bins[i - 1]);
          if (i == 1) {
            spacing = d;
          } else if (d != spacing) {
            regular = false;
          }
        }
        double max_err = 0.0;
        for (std::size_t i = 0; i < s.fitted_centers_m.size(); ++i) {
          max_err = std::max(max_err, std::abs(s.fitted_centers_m[i] -
                                               sc.fbg.center_wavelengths_m[i]));
        }
        out << " gratings " << s.grating_bins.size() << " first_bin "
            << (s.grating_bins.empty() ? 0 : s.grating_bins.front())
            << " bin_spacing ";
        if (s.grating_bins.size() < 2) {
          out << 0;
        } else if (regular) {
          out << spacing;
        } else {
          out << "irregular";
        }
        out << " max_center_error_m " << fmt(max_err);
        break;
      }
    }
    out << '\n';
  }
  close_out(out, path);
}

void write_analysis_outputs(const Scenario& sc, const RunResult& r,
                            const std::string& out_dir) {
  write_fingerprint_csv(out_dir + "/fingerprint.csv", r.fp);
  for (const AnalysisDirective& a : sc.analyses) {
    switch (a.kind) {
      case AnalysisDirective::Kind::Rtt:
      case AnalysisDirective::Kind::Amplitude:
      case AnalysisDirective::Kind::Phase:
      case AnalysisDirective::Kind::Temp:
        write_timeseries_csv(out_dir + "/" + a.name + ".csv",
                             r.series.at(a.name));
        break;
      case AnalysisDirective::Kind::Tone:
        write_tone_csv(out_dir + "/" + a.name + ".csv", r.tones.at(a.name));
        break;
      case AnalysisDirective::Kind::Fbg:
        write_fbg_csvs(out_dir, a, sc.fbg, r.sweeps.at(a.name));
        break;
    }
  }
  write_report(out_dir + "/report.txt", sc, r);
}

} // namespace

RunResult analyze_traces(const Scenario& sc, std::vector<CorrTrace> traces) {
  return analyze_core(sc, std::move(traces), true);
}

RunResult run_scenario(const Scenario& sc, const std::string& out_dir) {
  TraceArchive archive;
  { // scope the raw frames: only the quantized archive is kept
    const std::vector<CorrTrace> raw = synthesize_frames(sc);
    archive = archive_from_traces(raw, sc.probe.sample_rate_hz());
  }
  RunResult r =
      analyze_core(sc, traces_from_archive(archive, sc.frame_rate_hz), true);
  ensure_finite(r);

  std::filesystem::create_directories(out_dir);
  write_trace_archive(out_dir + "/traces.cotd", archive);
  write_analysis_outputs(sc, r, out_dir);
  return r;
}

RunResult analyze_archive(const Scenario& sc, const std::string& archive_path,
                          const std::string& out_dir) {
  const TraceArchive archive = read_trace_archive(archive_path);
  const double fs = sc.probe.sample_rate_hz();
  if (std::abs(archive.sample_rate_hz - fs) > 1e-6 * fs) {
    throw std::runtime_error(
        "archive sample rate " + fmt(archive.sample_rate_hz) +
        " Hz does not match the scenario probe (" + fmt(fs) + " Hz)");
  }
  RunResult r =
      analyze_core(sc, traces_from_archive(archive, sc.frame_rate_hz), true);
  ensure_finite(r);

  std::filesystem::create_directories(out_dir);
  write_analysis_outputs(sc, r, out_dir);
  return r;
}

RunResult run_fingerprint(const Scenario& sc, const std::string& out_dir) {
  TraceArchive archive;
  {
    const std::vector<CorrTrace> raw = synthesize_frames(sc);
    archive = archive_from_traces(raw, sc.probe.sample_rate_hz());
  }
  RunResult r =
      analyze_core(sc, traces_from_archive(archive, sc.frame_rate_hz), false);
  ensure_finite(r);

  std::filesystem::create_directories(out_dir);
  write_fingerprint_csv(out_dir + "/fingerprint.csv", r.fp);
  return r;
}

} // namespace cotdr
