#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vpc/dynamics.hpp"
#include "vpc/field.hpp"
#include "vpc/kernels.hpp"
#include "vpc/sampling.hpp"

namespace vpc {

/// Names accepted in [monitors] enabled.
inline constexpr std::string_view kMonitorNames[] = {
    "energy_drift", "velocity_energy_bound", "eta_bound",         "separation",
    "sqrt_h_variation", "lemma_fac",         "protection_sphere",
};

struct MonitorSettings {
  std::vector<std::string> enabled{kMonitorNames, kMonitorNames + std::size(kMonitorNames)};
  double energy_drift_tol = 1e-3;
  double separation_tol = 1e-2;
  double eta_tol = 1e-2;
  double lemma_fac_tol = 0.05;
  double sqrt_h_tol = 0.05;
  double sqrt_h_tol_field = 1e-6;

  bool has(std::string_view name) const;

  friend bool operator==(const MonitorSettings&, const MonitorSettings&) = default;
};

/// Parameters of the `oracle` and `study` subcommands.
struct StudySettings {
  std::vector<double> epsilons{0.1, 0.05, 0.025};
  std::vector<double> dts{4e-4, 2e-4, 1e-4};
  std::size_t samples = 64;
  double tolerance = 1e-12;  ///< two-body oracle local error
  Vec3 particle_position{-5.0, 0.5, 0.0};
  Vec3 particle_velocity{1.0, 0.0, 0.0};
  bool charge_mobile = false;
  double particle_weight = 1.0;

  friend bool operator==(const StudySettings&, const StudySettings&) = default;
};

struct RunConfig {
  InitialCondition initial;
  KernelSpec kernel;
  IntegratorConfig integrator;
  FieldSolverConfig field;  ///< field.kernel mirrors `kernel`
  double T = 1.0;
  std::optional<double> K1;  ///< empty: max(8 H(0), 1)
  std::string output = "out";
  std::size_t snapshot_stride = 100;  ///< in windows
  MonitorSettings monitors;
  StudySettings study;

  /// Throws ConfigError naming the violated invariant.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses the sectioned key = value format. Unknown sections or keys and
/// malformed values raise ConfigError with line and column. The result is
/// validated.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Every resolved value, in a form parse_config reads back to an equal config.
std::string to_text(const RunConfig& config);

/// FNV-1a of to_text(config).
std::uint64_t config_hash(const RunConfig& config);

}  // namespace vpc
