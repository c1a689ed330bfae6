#pragma once

#include "srf/cli/config.hpp"
#include "srf/continuity.hpp"
#include "srf/flow.hpp"
#include "srf/stability.hpp"

#include <json.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace srf::cli {

inline constexpr const char* kVersion = "srflab 0.1.0";

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

struct FitOutcome {
  std::optional<DecayFit> fit;
  std::string reason;  // why the fit is unavailable
};

/// Everything a run report is built from.
struct RunOutcome {
  RunConfig config;
  Trajectory trajectory;
  ConditionFlags flags;
  FitOutcome fit_Y, fit_W, fit_u;
  SpectrumReport final_spectrum;
  ShiMonitor shi;
  EquivalenceMonitor equivalence;
  std::optional<Renormalization> renormalization;
  std::string renormalization_reason;
  double ydot_max = 0.0;  // max Y-identity residual over interior samples
};

/// Integrates, annotates and evaluates one configuration. No I/O.
RunOutcome execute_run(const RunConfig& cfg);

nlohmann::json run_report(const RunOutcome& out);

/// Writes diagnostics.csv, snapshots.jsonl and report.json into dir.
void write_run_artifacts(const RunOutcome& out, const std::string& dir);

int cmd_run(const RunConfig& cfg, std::ostream& log);
/// Spectrum of the configured initial state: spectrum.json.
int cmd_spectrum(const RunConfig& cfg, std::ostream& log);
/// Continuity path from the configured initial state: continuity.csv and
/// continuity.json.
int cmd_continuity(const RunConfig& cfg, std::ostream& log);
/// Runs the Cartesian grid of cfg.sweep concurrently: run_NNN/ per run plus
/// summary.csv and summary.json.
int cmd_sweep(const RunConfig& cfg, std::ostream& log);

nlohmann::json spectrum_json(const SpectrumReport& rep);
nlohmann::json continuity_report(const ContinuityPath& path, const MetricState& reference);

/// Maps library exceptions to exit codes, reporting on log.
int guarded(std::ostream& log, const std::function<int()>& body);

}  // namespace srf::cli
