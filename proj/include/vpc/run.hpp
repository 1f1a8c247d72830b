#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vpc/config.hpp"
#include "vpc/monitor.hpp"

namespace vpc {

enum ExitCode : int {
  kExitPass = 0,
  kExitMonitorFailure = 1,
  kExitConfigError = 2,
  kExitIntegrationFailure = 3,
};

/// Aggregate of every check one monitor made during a run.
struct MonitorTally {
  std::string name;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::size_t skipped = 0;
  std::optional<MonitorResult> worst;  ///< largest measured (smallest for at_least monitors)
};

struct RunSummary {
  int exit_code = kExitPass;
  std::string error;
  double H0 = 0.0;
  double Q0 = 0.0;  ///< NaN without charges or particles
  double K1 = 0.0;
  std::size_t windows = 0;
  std::size_t substeps = 0;
  std::size_t rows = 0;
  double final_time = 0.0;
  double max_energy_drift = 0.0;       ///< max |H - H0| / H0 over diagnostics rows
  double min_charge_distance = 0.0;    ///< over every substep (inf if undefined)
  double min_charge_separation = 0.0;  ///< over every substep (inf if undefined)
  double q_running = 0.0;
  double envelope_C = 0.0;
  double max_protection_constant = 0.0;       ///< max meas(J) Q^{13/8}
  double max_protection_constant_wide = 0.0;  ///< max meas(J) Q^{15/8}
  double min_convexity_ratio = 0.0;
  std::vector<double> boundaries;
  std::vector<double> q_per_window;
  std::vector<MonitorTally> monitors;
};

struct RunOptions {
  std::ostream* log = nullptr;  ///< progress lines; null for silence
};

/// Samples the initial state, runs every analysis window to T and writes
/// into config.output:
///   resolved_config.ini, initial.snap, snap_NNNNNN.snap (every
///   snapshot_stride windows), final.snap, diagnostics.csv, summary.json.
/// Never throws for integration failures: they end the run with
/// kExitIntegrationFailure after flushing what was produced.
RunSummary run_command(const RunConfig& config, const RunOptions& options = {});

/// Column names of diagnostics.csv for a monitor list.
std::vector<std::string> diagnostics_columns(const MonitorSettings& monitors);

}  // namespace vpc
