// Command-line front door: validate scenario files, run them, regenerate
// fingerprints, or re-run the analyses against a previously written trace
// archive. Exit codes: 0 ok, 1 scenario validation error, 2 runtime or
// numerical error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cotdr/scenario.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cotdr::ScenarioError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Parse + override + check in one pass so diagnostics describe the scenario
// as it will actually run. Warnings go to stderr; errors abort via
// ScenarioError (exit code 1).
cotdr::Scenario load_for_run(const std::string& path,
                             const cotdr::RunOverrides& ov) {
  const std::string text = slurp(path);
  std::vector<cotdr::Diagnostic> diags;
  cotdr::Scenario sc = cotdr::parse_scenario(text, diags);
  sc = cotdr::apply_overrides(sc, ov);
  cotdr::check_scenario(sc, diags);
  cotdr::annotate_lines(text, diags);
  if (cotdr::has_errors(diags)) {
    std::ostringstream os;
    os << "invalid scenario " << path << ":";
    for (const cotdr::Diagnostic& d : diags) os << "\n  " << to_string(d);
    throw cotdr::ScenarioError(os.str());
  }
  for (const cotdr::Diagnostic& d : diags) {
    std::cerr << to_string(d) << '\n';
  }
  return sc;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"correlation-OTDR laboratory: scenario runner and analyzer"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string archive_path;
  std::string out_dir = "out";
  cotdr::RunOverrides ov;

  CLI::App* validate =
      app.add_subcommand("validate", "check a scenario file and print "
                                     "diagnostics; writes nothing");
  validate->add_option("scenario", scenario_path, "scenario JSON file")
      ->required();

  CLI::App* run = app.add_subcommand(
      "run", "synthesize frames, write trace archive, fingerprint, analysis "
             "CSVs and report");
  CLI::App* fingerprint = app.add_subcommand(
      "fingerprint", "synthesize frames and write only the averaged "
                     "fingerprint CSV");
  CLI::Option* seed_opts[2];
  CLI::Option* frames_opts[2];
  CLI::App* synth[2] = {run, fingerprint};
  for (int i = 0; i < 2; ++i) {
    synth[i]->add_option("scenario", scenario_path, "scenario JSON file")
        ->required();
    synth[i]->add_option("--out-dir", out_dir, "output directory")
        ->capture_default_str();
    seed_opts[i] = synth[i]->add_option("--seed", ov.seed,
                                        "override the scenario noise seed");
    frames_opts[i] =
        synth[i]
            ->add_option("--frames", ov.frames, "override the frame count")
            ->check(CLI::PositiveNumber);
  }

  CLI::App* analyze = app.add_subcommand(
      "analyze", "re-run the scenario's analyses against an existing trace "
                 "archive");
  analyze->add_option("scenario", scenario_path, "scenario JSON file")
      ->required();
  analyze->add_option("archive", archive_path, "trace archive (.cotd)")
      ->required();
  analyze->add_option("--out-dir", out_dir, "output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e); // prints help or the parse error
    return rc == 0 ? 0 : 1;
  }
  ov.has_seed = seed_opts[0]->count() > 0 || seed_opts[1]->count() > 0;
  ov.has_frames = frames_opts[0]->count() > 0 || frames_opts[1]->count() > 0;

  try {
    if (validate->parsed()) {
      const std::vector<cotdr::Diagnostic> diags =
          cotdr::validate_file(scenario_path);
      for (const cotdr::Diagnostic& d : diags) {
        std::cout << to_string(d) << '\n';
      }
      if (diags.empty()) std::cout << "ok: " << scenario_path << '\n';
      return cotdr::has_errors(diags) ? 1 : 0;
    }

    if (analyze->parsed()) {
      // The archive is the authority on the frame count: a run recorded
      // with --frames must re-analyze cleanly from the same scenario file.
      const cotdr::TraceArchive archive =
          cotdr::read_trace_archive(archive_path);
      cotdr::RunOverrides frames_ov;
      frames_ov.has_frames = true;
      frames_ov.frames = archive.frames.size();
      const cotdr::Scenario sc = load_for_run(scenario_path, frames_ov);
      const cotdr::RunResult r =
          cotdr::analyze_archive(sc, archive_path, out_dir);
      std::cout << "ok: analyzed " << r.traces.size() << " frame(s), "
                << r.peaks.size() << " peak(s), outputs in " << out_dir
                << '\n';
      return 0;
    }

    const cotdr::Scenario sc = load_for_run(scenario_path, ov);
    if (run->parsed()) {
      const cotdr::RunResult r = cotdr::run_scenario(sc, out_dir);
      std::cout << "ok: " << r.traces.size() << " frame(s), "
                << r.peaks.size() << " peak(s), outputs in " << out_dir
                << '\n';
    } else {
      const cotdr::RunResult r = cotdr::run_fingerprint(sc, out_dir);
      std::cout << "ok: fingerprint over " << r.traces.size()
                << " frame(s) in " << out_dir << '\n';
    }
    return 0;
  } catch (const cotdr::ScenarioError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const cotdr::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
