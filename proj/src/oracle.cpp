#include "vpc/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "vpc/errors.hpp"

namespace vpc {

namespace odeint = boost::numeric::odeint;

namespace {

using OdeState = std::array<double, 12>;

Vec3 get(const OdeState& s, std::size_t k) { return {s[k], s[k + 1], s[k + 2]}; }
void put(OdeState& s, std::size_t k, const Vec3& v) {
  s[k] = v.x;
  s[k + 1] = v.y;
  s[k + 2] = v.z;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void TwoBodyProblem::validate() const {
  if (!is_finite(x) || !is_finite(v) || !is_finite(xi) || !is_finite(eta)) {
    throw DomainError("two-body: non-finite initial data");
  }
  if (x == xi) throw DomainError("two-body: particle starts on the charge");
  if (!(particle_weight >= 0.0)) throw DomainError("two-body: particle_weight must be >= 0");
}

std::vector<TwoBodySample> two_body_reference(const TwoBodyProblem& problem, double T, double tolerance,
                                              std::vector<double> times) {
  problem.validate();
  if (!(tolerance > 0.0 && tolerance <= 1e-10)) throw DomainError("two-body: tolerance must lie in (0, 1e-10]");
  if (!std::isfinite(T)) throw DomainError("two-body: T must be finite");
  if (times.empty()) times = {0.0, T};
  const double sign = T < 0.0 ? -1.0 : 1.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (sign * (times[k] - times[k - 1]) < 0.0) throw DomainError("two-body: times must be monotone toward T");
  }

  const bool mobile = problem.charge_mobile;
  const double w = problem.particle_weight;
  auto rhs = [mobile, w](const OdeState& s, OdeState& ds, double) {
    const Vec3 r = get(s, 0) - get(s, 6);
    const double r2 = norm2(r);
    if (r2 == 0.0) throw DomainError("two-body: collision");
    const Vec3 f = r / (r2 * std::sqrt(r2));
    put(ds, 0, get(s, 3));
    put(ds, 3, f);
    put(ds, 6, mobile ? get(s, 9) : Vec3{});
    put(ds, 9, mobile ? -(w * f) : Vec3{});
  };

  OdeState s{};
  put(s, 0, problem.x);
  put(s, 3, problem.v);
  put(s, 6, problem.xi);
  put(s, 9, mobile ? problem.eta : Vec3{});

  std::vector<TwoBodySample> out;
  out.reserve(times.size());
  auto observe = [&out](const OdeState& st, double t) {
    out.push_back({t, get(st, 0), get(st, 3), get(st, 6), get(st, 9)});
  };
  auto stepper = odeint::make_controlled(tolerance, tolerance, odeint::runge_kutta_fehlberg78<OdeState>());
  odeint::integrate_times(stepper, rhs, s, times.begin(), times.end(), sign * 1e-4, observe,
                          odeint::max_step_checker(100000000));
  return out;
}

double two_body_energy(const TwoBodyProblem& problem, const TwoBodySample& s) {
  const double r = norm(s.x - s.xi);
  const double particle = 0.5 * norm2(s.v) + 1.0 / r;
  if (!problem.charge_mobile) return particle;
  return problem.particle_weight * particle + 0.5 * norm2(s.eta);
}

Vec3 two_body_angular_momentum(const TwoBodyProblem& problem, const TwoBodySample& s) {
  if (!problem.charge_mobile) return cross(s.x - s.xi, s.v);
  return problem.particle_weight * cross(s.x, s.v) + cross(s.xi, s.eta);
}

double head_on_pericenter(double d0, double u, double mu) {
  if (!(d0 > 0.0) || !(mu > 0.0)) throw DomainError("head_on_pericenter: need d0 > 0 and mu > 0");
  return mu / (0.5 * u * u + mu / d0);
}

SimState to_sim_state(const TwoBodyProblem& problem) {
  problem.validate();
  SimState s;
  const double w = problem.charge_mobile ? problem.particle_weight : 0.0;
  s.ensemble = PlasmaEnsemble({Macroparticle{problem.x, problem.v, w}});
  s.charges = {ChargeState{problem.xi, problem.charge_mobile ? problem.eta : Vec3{}}};
  return s;
}

std::vector<Vec3> field_brute_force(std::span<const Vec3> targets, const PlasmaEnsemble& ensemble,
                                    const KernelSpec& spec) {
  const double e2 = spec.epsilon_plasma * spec.epsilon_plasma;
  std::vector<Vec3> out;
  out.reserve(targets.size());
  for (const Vec3& x : targets) {
    double ex = 0.0, ey = 0.0, ez = 0.0;
    for (const auto& p : ensemble.particles()) {
      const double dx = x.x - p.position.x;
      const double dy = x.y - p.position.y;
      const double dz = x.z - p.position.z;
      const double s2 = dx * dx + dy * dy + dz * dz + e2;
      if (s2 == 0.0) throw DomainError("field_brute_force: target on an unsoftened source");
      const double c = p.weight / (s2 * std::sqrt(s2));
      ex += c * dx;
      ey += c * dy;
      ez += c * dz;
    }
    out.push_back({ex, ey, ez});
  }
  return out;
}

double max_position_difference(const SimState& a, const SimState& b) {
  if (a.ensemble.size() != b.ensemble.size() || a.charges.size() != b.charges.size()) {
    throw DomainError("max_position_difference: states differ in size");
  }
  double d = 0.0;
  for (std::size_t j = 0; j < a.ensemble.size(); ++j) {
    d = std::max(d, norm(a.ensemble[j].position - b.ensemble[j].position));
  }
  for (std::size_t k = 0; k < a.charges.size(); ++k) {
    d = std::max(d, norm(a.charges[k].position - b.charges[k].position));
  }
  return d;
}

// ---------------------------------------------------------------------------

namespace {

struct SampledRun {
  std::vector<SimState> samples;
  double min_distance = std::numeric_limits<double>::infinity();
  std::size_t substeps = 0;
};

SampledRun run_sampled(const SimState& initial, const FieldSolverConfig& field,
                       const IntegratorConfig& integrator, double T, std::size_t samples) {
  SampledRun run;
  Propagator prop(initial, field);
  run.samples.push_back(prop.state());
  const bool has_pairs = !initial.ensemble.empty() && !initial.charges.empty();
  if (has_pairs) run.min_distance = min_charge_distance(initial);
  for (std::size_t k = 1; k <= samples; ++k) {
    const double t = initial.time + T * static_cast<double>(k) / static_cast<double>(samples);
    const auto outcome = run_window(prop, t, integrator, {});
    run.substeps += outcome.substeps;
    run.min_distance = std::min(run.min_distance, outcome.min_charge_distance);
    run.samples.push_back(prop.state());
  }
  return run;
}

}  // namespace

EpsilonStudyReport epsilon_convergence_study(const SimState& initial, const FieldSolverConfig& field,
                                             const IntegratorConfig& integrator,
                                             std::span<const double> epsilons, double T,
                                             std::size_t samples) {
  if (epsilons.empty()) throw DomainError("epsilon study: no epsilons");
  if (!(T > 0.0)) throw DomainError("epsilon study: T must be > 0");
  if (samples == 0) throw DomainError("epsilon study: samples must be >= 1");
  const double eps_max = *std::max_element(epsilons.begin(), epsilons.end());
  if (!initial.ensemble.empty() && !initial.charges.empty() && !(min_charge_distance(initial) > 4.0 * eps_max)) {
    throw DomainError("epsilon study: initial distance to the charges must exceed 4 max(eps)");
  }

  EpsilonStudyReport report;
  std::vector<SampledRun> runs;
  for (double eps : epsilons) {
    FieldSolverConfig cfg = field;
    cfg.kernel.epsilon_charge = eps;
    cfg.validate();
    runs.push_back(run_sampled(initial, cfg, integrator, T, samples));
    report.epsilons.push_back(eps);
    report.min_charge_distance.push_back(runs.back().min_distance);
    report.substeps.push_back(runs.back().substeps);
  }
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    EpsilonPair pair;
    pair.eps_coarse = epsilons[k];
    pair.eps_fine = epsilons[k + 1];
    pair.comparable = runs[k].min_distance >= epsilons[k] && runs[k + 1].min_distance >= epsilons[k + 1];
    for (std::size_t s = 0; s < runs[k].samples.size(); ++s) {
      const SimState& a = runs[k].samples[s];
      const SimState& b = runs[k + 1].samples[s];
      for (std::size_t c = 0; c < a.charges.size(); ++c) {
        pair.charge_sup_diff = std::max(pair.charge_sup_diff, norm(a.charges[c].position - b.charges[c].position));
      }
      if (!a.ensemble.empty()) {
        double sum = 0.0;
        for (std::size_t j = 0; j < a.ensemble.size(); ++j) sum += norm(a.ensemble[j].position - b.ensemble[j].position);
        pair.particle_mean_diff = std::max(pair.particle_mean_diff, sum / static_cast<double>(a.ensemble.size()));
      }
    }
    report.pairs.push_back(pair);
  }
  return report;
}

DtStudyReport dt_convergence_study(const SimState& initial, const FieldSolverConfig& field,
                                   const IntegratorConfig& integrator, std::span<const double> dts,
                                   double T) {
  if (dts.empty()) throw DomainError("dt study: no dts");
  if (!(T > 0.0)) throw DomainError("dt study: T must be > 0");
  std::vector<double> sorted(dts.begin(), dts.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  DtStudyReport report;
  for (double dt : sorted) {
    IntegratorConfig cfg = integrator;
    cfg.adaptive = false;
    cfg.dt_max = dt;
    cfg.validate();
    Propagator prop(initial, field);
    const auto outcome = run_window(prop, initial.time + T, cfg, {});
    DtRun run;
    run.dt = dt;
    run.substeps = outcome.substeps;
    run.min_charge_bound = outcome.min_charge_bound;
    run.unstable = dt > outcome.min_charge_bound;
    run.final_state = prop.state();
    report.runs.push_back(std::move(run));
  }

  const SimState& finest = report.runs.back().final_state;
  for (std::size_t k = 0; k < report.runs.size(); ++k) {
    auto& r = report.runs[k];
    r.error_vs_finest = max_position_difference(r.final_state, finest);
    r.increment = k + 1 < report.runs.size()
                      ? max_position_difference(r.final_state, report.runs[k + 1].final_state)
                      : kNaN;
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k + 1 < report.runs.size(); ++k) {
    const auto& r = report.runs[k];
    if (r.unstable || report.runs[k + 1].unstable || !(r.increment > 0.0)) continue;
    const double lx = std::log(r.dt);
    const double ly = std::log(r.increment);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  report.fit_points = n;
  const double nn = static_cast<double>(n);
  report.order = n >= 2 ? (nn * sxy - sx * sy) / (nn * sxx - sx * sx) : kNaN;
  return report;
}

}  // namespace vpc
