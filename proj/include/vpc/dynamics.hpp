#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vpc/diagnostics.hpp"
#include "vpc/errors.hpp"
#include "vpc/field.hpp"
#include "vpc/monitor.hpp"
#include "vpc/state.hpp"

namespace vpc {

/// Substep control and analysis-window parameters.
///
/// The adaptive step is the minimum of dt_max, a charge bound
/// cfl_charge * max(eps, d_near)^{3/2} (d_near: closest particle-charge or
/// charge-charge distance) and a speed bound cfl_speed * spacing / max speed.
/// With `adaptive` off every substep is dt_max.
struct IntegratorConfig {
  double dt_max = 0.01;
  double cfl_charge = 0.05;
  double cfl_speed = 0.1;
  double window_K2 = 16.0;
  std::size_t output_stride = 1;
  bool adaptive = true;

  void validate() const;

  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

/// Analysis windows 0 = t_0 < t_1 < ... < t_n = T with gaps <= delta_T.
struct WindowPartition {
  std::vector<double> boundaries;
  double delta_T = 0.0;
  std::vector<double> q_per_window;  ///< filled in as windows complete
  std::size_t windows() const { return boundaries.empty() ? 0 : boundaries.size() - 1; }
};

/// delta_T = 1 / (K2 Q). One window when delta_T >= T, else t_i = i delta_T
/// while i delta_T < T, closed by T (so every gap is <= delta_T).
WindowPartition build_partition(double T, double Q_estimate, const IntegratorConfig& config);

/// Particle acceleration E + F and charge acceleration (plasma field at the
/// charge plus bare Coulomb from the other charges).
Accelerations acceleration(const SimState& state, const FieldSolverConfig& config);

struct PhasePoint {
  Vec3 position;
  Vec3 velocity;
};

/// Kick-drift-kick step of a single phase point in a frozen field.
PhasePoint verlet_step(const PhasePoint& point, double dt, const std::function<Vec3(const Vec3&)>& field);

/// Owns a state together with its accelerations so that each velocity-Verlet
/// step costs one field evaluation.
class Propagator {
 public:
  Propagator(SimState state, FieldSolverConfig config);

  const SimState& state() const { return state_; }
  const Accelerations& accelerations() const { return acc_; }
  const FieldSolverConfig& config() const { return config_; }

  /// One kick-drift-kick step of every particle and charge. Throws
  /// IntegrationError naming the first body with a non-finite coordinate;
  /// the propagator keeps its pre-step state in that case.
  void advance(double dt);

  /// Advances and overwrites the time with `time` (used to land exactly on
  /// window ends).
  void advance_to(double dt, double time);

 private:
  SimState state_;
  FieldSolverConfig config_;
  Accelerations acc_;
};

/// One velocity-Verlet step with freshly computed accelerations.
SimState step(const SimState& state, double dt, const FieldSolverConfig& config);

double charge_bound_term(const SimState& state, const IntegratorConfig& config, const KernelSpec& spec);
double speed_bound_term(const SimState& state, const IntegratorConfig& config);
double adaptive_dt(const SimState& state, const IntegratorConfig& config, const KernelSpec& spec);

struct WindowOptions {
  std::size_t window_index = 0;
  double K1 = 1.0;
  bool record_trajectory = false;
  /// Called after every substep with the running substep count of the window.
  std::function<void(const Propagator&, std::size_t)> after_substep;
};

struct WindowOutcome {
  std::vector<MonitorResult> records;  ///< one per monitor per substep
  std::size_t substeps = 0;
  double q_window = 0.0;               ///< sup of sqrt h over the window (NaN if undefined)
  double min_charge_distance = 0.0;    ///< running min over samples (inf if undefined)
  double min_charge_separation = 0.0;  ///< running min over samples (inf if undefined)
  double min_charge_bound = 0.0;       ///< smallest charge_bound_term seen
  double max_dt = 0.0;
  WindowTrajectory trajectory;
};

/// Thrown by run_window when the integrator fails; carries what was recorded.
class WindowAborted : public IntegrationError {
 public:
  WindowAborted(const IntegrationError& cause, WindowOutcome partial)
      : IntegrationError(cause), partial_(std::move(partial)) {}
  const WindowOutcome& partial() const { return partial_; }

 private:
  WindowOutcome partial_;
};

/// Substeps `propagator` to t_end (last substep clipped), invoking every
/// monitor after each substep.
WindowOutcome run_window(Propagator& propagator, double t_end, const IntegratorConfig& integrator,
                         std::span<SubstepMonitor* const> monitors, const WindowOptions& options = {});

/// Value form of run_window.
std::pair<SimState, WindowOutcome> run_window(const SimState& state, double t_end,
                                              const IntegratorConfig& integrator,
                                              const FieldSolverConfig& field,
                                              std::span<SubstepMonitor* const> monitors,
                                              const WindowOptions& options = {});

}  // namespace vpc
