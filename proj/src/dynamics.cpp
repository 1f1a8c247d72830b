#include "vpc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vpc/errors.hpp"

namespace vpc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void IntegratorConfig::validate() const {
  if (!(dt_max > 0.0) || !std::isfinite(dt_max)) throw ConfigError("integrator: dt_max must be > 0");
  if (!(cfl_charge > 0.0 && cfl_charge <= 1.0)) throw ConfigError("integrator: cfl_charge must lie in (0, 1]");
  if (!(cfl_speed > 0.0) || !std::isfinite(cfl_speed)) throw ConfigError("integrator: cfl_speed must be > 0");
  if (!(window_K2 >= 16.0) || !std::isfinite(window_K2)) throw ConfigError("integrator: window_K2 must be >= 16");
  if (output_stride < 1) throw ConfigError("integrator: output_stride must be >= 1");
}

WindowPartition build_partition(double T, double Q_estimate, const IntegratorConfig& config) {
  if (!(T > 0.0)) throw DomainError("build_partition: T must be > 0");
  if (!(Q_estimate > 0.0)) throw DomainError("build_partition: Q estimate must be > 0");
  WindowPartition part;
  part.delta_T = 1.0 / (config.window_K2 * Q_estimate);
  part.boundaries.push_back(0.0);
  if (part.delta_T < T) {
    for (std::size_t i = 1;; ++i) {
      const double t = static_cast<double>(i) * part.delta_T;
      if (t >= T * (1.0 - 1e-12)) break;
      part.boundaries.push_back(t);
    }
  }
  part.boundaries.push_back(T);
  return part;
}

Accelerations acceleration(const SimState& state, const FieldSolverConfig& config) {
  Accelerations acc;
  acc.plasma = plasma_self_field(state.ensemble, config);
  acc.particles.resize(state.ensemble.size());
  for (std::size_t j = 0; j < state.ensemble.size(); ++j) {
    acc.particles[j] = acc.plasma[j] + charge_field(state.ensemble[j].position, state.charges, config.kernel);
  }
  acc.charges.resize(state.charges.size());
  for (std::size_t a = 0; a < state.charges.size(); ++a) acc.charges[a] = field_on_charge(a, state, config);
  return acc;
}

PhasePoint verlet_step(const PhasePoint& point, double dt, const std::function<Vec3(const Vec3&)>& field) {
  const Vec3 half = point.velocity + (0.5 * dt) * field(point.position);
  const Vec3 x = point.position + dt * half;
  return {x, half + (0.5 * dt) * field(x)};
}

Propagator::Propagator(SimState state, FieldSolverConfig config)
    : state_(std::move(state)), config_(std::move(config)) {
  acc_ = acceleration(state_, config_);
}

void Propagator::advance(double dt) { advance_to(dt, state_.time + dt); }

void Propagator::advance_to(double dt, double time) {
  SimState next = state_;
  const double half = 0.5 * dt;
  for (std::size_t j = 0; j < next.ensemble.size(); ++j) {
    const auto& p = next.ensemble[j];
    const Vec3 v_half = p.velocity + half * acc_.particles[j];
    next.ensemble.set_phase(j, p.position + dt * v_half, v_half);
  }
  for (std::size_t a = 0; a < next.charges.size(); ++a) {
    auto& c = next.charges[a];
    c.velocity += half * acc_.charges[a];
    c.position += dt * c.velocity;
  }
  next.time = time;

  auto check_finite = [&](const SimState& s) {
    for (std::size_t j = 0; j < s.ensemble.size(); ++j) {
      const auto& p = s.ensemble[j];
      if (!is_finite(p.position) || !is_finite(p.velocity)) {
        throw IntegrationError(IntegrationError::Body::particle, j, time);
      }
    }
    for (std::size_t a = 0; a < s.charges.size(); ++a) {
      if (!is_finite(s.charges[a].position) || !is_finite(s.charges[a].velocity)) {
        throw IntegrationError(IntegrationError::Body::charge, a, time);
      }
    }
  };
  check_finite(next);

  Accelerations acc;
  try {
    acc = acceleration(next, config_);
  } catch (const DomainError&) {
    // Coincident bodies after the drift: report as an integration failure.
    throw IntegrationError(IntegrationError::Body::charge, 0, time);
  }
  for (std::size_t j = 0; j < next.ensemble.size(); ++j) {
    const auto& p = next.ensemble[j];
    next.ensemble.set_phase(j, p.position, p.velocity + half * acc.particles[j]);
  }
  for (std::size_t a = 0; a < next.charges.size(); ++a) next.charges[a].velocity += half * acc.charges[a];
  check_finite(next);

  state_ = std::move(next);
  acc_ = std::move(acc);
}

SimState step(const SimState& state, double dt, const FieldSolverConfig& config) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be > 0");
  Propagator prop(state, config);
  prop.advance(dt);
  return prop.state();
}

double charge_bound_term(const SimState& state, const IntegratorConfig& config, const KernelSpec& spec) {
  double d_near = kInf;
  if (!state.ensemble.empty() && !state.charges.empty()) d_near = min_charge_distance(state);
  if (state.charges.size() >= 2) d_near = std::min(d_near, min_charge_separation(state));
  if (!std::isfinite(d_near)) return kInf;
  return config.cfl_charge * std::pow(std::max(spec.epsilon_charge, d_near), 1.5);
}

double speed_bound_term(const SimState& state, const IntegratorConfig& config) {
  const std::size_t m = state.ensemble.size();
  if (m < 2) return kInf;
  const double vmax = max_speed(state);
  if (vmax == 0.0) return kInf;
  Vec3 lo = state.ensemble[0].position, hi = lo;
  for (const auto& p : state.ensemble.particles()) {
    lo = {std::min(lo.x, p.position.x), std::min(lo.y, p.position.y), std::min(lo.z, p.position.z)};
    hi = {std::max(hi.x, p.position.x), std::max(hi.y, p.position.y), std::max(hi.z, p.position.z)};
  }
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  if (extent == 0.0) return kInf;
  const double spacing = extent / std::cbrt(static_cast<double>(m));
  return config.cfl_speed * spacing / vmax;
}

double adaptive_dt(const SimState& state, const IntegratorConfig& config, const KernelSpec& spec) {
  if (!config.adaptive) return config.dt_max;
  return std::min({config.dt_max, charge_bound_term(state, config, spec), speed_bound_term(state, config)});
}

WindowOutcome run_window(Propagator& prop, double t_end, const IntegratorConfig& integrator,
                         std::span<SubstepMonitor* const> monitors, const WindowOptions& options) {
  WindowOutcome out;
  const auto& kernel = prop.config().kernel;
  const bool has_pairs = !prop.state().ensemble.empty() && !prop.state().charges.empty();
  const bool has_charge_pairs = prop.state().charges.size() >= 2;

  auto observe = [&](const SimState& s) {
    if (has_pairs) {
      out.q_window = std::max(out.q_window, compute_Q(s, options.K1, kernel));
      out.min_charge_distance = std::min(out.min_charge_distance, min_charge_distance(s));
    }
    if (has_charge_pairs) out.min_charge_separation = std::min(out.min_charge_separation, min_charge_separation(s));
  };

  out.q_window = has_pairs ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  out.min_charge_distance = kInf;
  out.min_charge_separation = kInf;
  out.min_charge_bound = kInf;
  if (options.record_trajectory) out.trajectory.begin(prop.state(), options.K1, kernel);
  observe(prop.state());

  while (prop.state().time < t_end) {
    const double t = prop.state().time;
    out.min_charge_bound = std::min(out.min_charge_bound, charge_bound_term(prop.state(), integrator, kernel));
    double dt = adaptive_dt(prop.state(), integrator, kernel);
    const double remaining = t_end - t;
    const bool last = remaining <= dt * (1.0 + 1e-6);
    if (last) dt = remaining;

    const SimState before = prop.state();
    const Accelerations acc_before = prop.accelerations();
    try {
      if (last) {
        prop.advance_to(dt, t_end);
      } else {
        prop.advance(dt);
      }
    } catch (const IntegrationError& e) {
      throw WindowAborted(e, std::move(out));
    }
    ++out.substeps;
    out.max_dt = std::max(out.max_dt, dt);

    const SubstepView view{options.window_index, dt, before, prop.state(), acc_before, prop.accelerations(), kernel};
    for (auto* m : monitors) out.records.push_back(m->check(view));
    observe(prop.state());
    if (options.record_trajectory) out.trajectory.append(prop.state());
    if (options.after_substep) options.after_substep(prop, out.substeps);
  }
  return out;
}

std::pair<SimState, WindowOutcome> run_window(const SimState& state, double t_end,
                                              const IntegratorConfig& integrator,
                                              const FieldSolverConfig& field,
                                              std::span<SubstepMonitor* const> monitors,
                                              const WindowOptions& options) {
  Propagator prop(state, field);
  auto outcome = run_window(prop, t_end, integrator, monitors, options);
  return {prop.state(), std::move(outcome)};
}

}  // namespace vpc
