#include "vpc/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>

#include "vpc/errors.hpp"
#include "vpc/field.hpp"
#include "vpc/parallel.hpp"
#include "pair_blocks.hpp"

namespace vpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double plasma_pair_energy(const PlasmaEnsemble& ensemble, const KernelSpec& spec, unsigned threads) {
  const std::size_t m = ensemble.size();
  std::vector<double> xs(m), ys(m), zs(m), ws(m);
  for (std::size_t j = 0; j < m; ++j) {
    xs[j] = ensemble[j].position.x;
    ys[j] = ensemble[j].position.y;
    zs[j] = ensemble[j].position.z;
    ws[j] = ensemble[j].weight;
  }
  const double e2 = spec.epsilon_plasma * spec.epsilon_plasma;
  const auto rows = detail::pair_block_rows(m);
  std::array<double, detail::kPairBlocks> partial{};
  parallel_for(detail::kPairBlocks, threads, [&](std::size_t bb, std::size_t be) {
    for (std::size_t b = bb; b < be; ++b) {
      double block = 0.0;
      for (std::size_t i = rows[b]; i < rows[b + 1]; ++i) {
        const double xi = xs[i], yi = ys[i], zi = zs[i];
        double row = 0.0;
#pragma omp simd reduction(+ : row)
        for (std::size_t j = i + 1; j < m; ++j) {
          const double dx = xi - xs[j], dy = yi - ys[j], dz = zi - zs[j];
          row += ws[j] / std::sqrt(dx * dx + dy * dy + dz * dz + e2);
        }
        block += ws[i] * row;
      }
      partial[b] = block;
    }
  });
  double sum = 0.0;
  for (double p : partial) sum += p;
  if (!std::isfinite(sum)) throw DomainError("total_energy: coincident particles with epsilon_plasma = 0");
  return sum;
}

MonitorResult make_result(std::string name, std::size_t window = 0) {
  MonitorResult r;
  r.name = std::move(name);
  r.window = window;
  return r;
}

}  // namespace

EnergyReport total_energy(const SimState& state, const KernelSpec& spec, unsigned threads) {
  EnergyReport e;
  for (const auto& p : state.ensemble.particles()) e.kinetic_plasma += 0.5 * p.weight * norm2(p.velocity);
  for (const auto& c : state.charges) e.kinetic_charges += 0.5 * norm2(c.velocity);
  for (const auto& c : state.charges) {
    for (const auto& p : state.ensemble.particles()) {
      e.plasma_charge_potential += p.weight * regularized_charge_potential(p.position - c.position, spec);
    }
  }
  e.plasma_plasma_potential = plasma_pair_energy(state.ensemble, spec, threads);
  const auto& q = state.charges;
  for (std::size_t a = 0; a < q.size(); ++a) {
    for (std::size_t b = a + 1; b < q.size(); ++b) {
      const Vec3 r = q[a].position - q[b].position;
      if (norm2(r) == 0.0) throw DomainError("total_energy: coincident charges");
      e.charge_charge_potential += coulomb_potential(r);
    }
  }
  e.total = e.kinetic_plasma + e.kinetic_charges + e.plasma_charge_potential +
            e.plasma_plasma_potential + e.charge_charge_potential;
  return e;
}

double default_K1(double H) { return std::max(8.0 * H, 1.0); }

AnalysisParameters AnalysisParameters::from_Q(double Q, double K1, double K2) {
  AnalysisParameters p;
  p.Q = Q;
  p.K1 = K1;
  p.K2 = K2;
  p.delta_T = 1.0 / (K2 * Q);
  p.R = std::pow(Q, 0.75);
  p.delta = std::pow(Q, -0.875);
  p.l = 1.0 / (Q * Q);
  return p;
}

double pointwise_energy(const Macroparticle& particle, const ChargeState& charge, double K1,
                        const KernelSpec& spec) {
  return 0.5 * norm2(particle.velocity - charge.velocity) +
         regularized_charge_potential(particle.position - charge.position, spec) + K1;
}

double compute_Q(const SimState& state, double K1, const KernelSpec& spec) {
  if (state.charges.empty()) throw DomainError("compute_Q: Q is undefined without charges");
  if (state.ensemble.empty()) throw DomainError("compute_Q: empty ensemble");
  double best = 0.0;
  for (const auto& c : state.charges) {
    for (const auto& p : state.ensemble.particles()) best = std::max(best, pointwise_energy(p, c, K1, spec));
  }
  return std::sqrt(best);
}

MonitorResult velocity_energy_bound_check(const SimState& state, double K1, const KernelSpec& spec) {
  auto r = make_result("velocity_energy_bound");
  r.bound = 1.0;
  const auto particles = state.ensemble.particles();
  for (std::size_t j = 0; j < particles.size(); ++j) {
    const double speed = norm(particles[j].velocity);
    if (speed == 0.0) continue;
    for (const auto& c : state.charges) {
      const double h = pointwise_energy(particles[j], c, K1, spec);
      const double ratio = h > 0.0 ? speed / (2.0 * std::sqrt(h)) : kInf;
      if (ratio > r.measured) {
        r.measured = ratio;
        r.witness = MonitorResult::Witness{j, state.time};
      }
    }
  }
  r.skipped = state.charges.empty();
  return r.judge();
}

MonitorResult eta_bound_check(const SimState& state, double H0, double tol) {
  auto r = make_result("eta_bound");
  r.bound = std::sqrt(2.0 * H0) * (1.0 + tol);
  for (std::size_t a = 0; a < state.charges.size(); ++a) {
    const double s = norm(state.charges[a].velocity);
    if (!r.witness || s > r.measured) {
      r.measured = s;
      r.witness = MonitorResult::Witness{a, state.time};
    }
  }
  r.skipped = state.charges.empty();
  return r.judge();
}

MonitorResult separation_check(const SimState& state, double H0, double tol) {
  auto r = make_result("separation");
  r.sense = MonitorResult::Sense::at_least;
  r.bound = (1.0 / (2.0 * H0)) * (1.0 - tol);
  if (state.charges.size() < 2) {
    r.skipped = true;
    return r.judge();
  }
  r.measured = min_charge_separation(state);
  return r.judge();
}

MonitorResult sqrt_h_variation_check(const SubstepView& view, double K1, double tol, double tol_field) {
  auto r = make_result("sqrt_h_variation", view.window);
  r.bound = 1.0;
  const auto& before = view.before;
  const auto& after = view.after;
  const std::size_t m = before.ensemble.size();
  const std::size_t n = before.charges.size();
  if (m == 0 || n == 0) {
    r.skipped = true;
    return r.judge();
  }
  for (std::size_t a = 0; a < n; ++a) {
    const auto& c0 = before.charges[a];
    const auto& c1 = after.charges[a];
    const double s_xi = std::max(norm(view.acc_before.charges[a]), norm(view.acc_after.charges[a]));
    for (std::size_t j = 0; j < m; ++j) {
      const auto& p0 = before.ensemble[j];
      const auto& p1 = after.ensemble[j];
      const Vec3 smooth0 =
          view.acc_before.particles[j] - regularized_charge_force(p0.position - c0.position, view.kernel);
      const Vec3 smooth1 =
          view.acc_after.particles[j] - regularized_charge_force(p1.position - c1.position, view.kernel);
      const double s_x = std::max(norm(smooth0), norm(smooth1));
      const double change = std::abs(std::sqrt(pointwise_energy(p1, c1, K1, view.kernel)) -
                                     std::sqrt(pointwise_energy(p0, c0, K1, view.kernel)));
      const double budget = (s_x + s_xi + tol_field) * view.dt * (1.0 + tol);
      const double ratio = budget > 0.0 ? change / budget : (change > 0.0 ? kInf : 0.0);
      if (!r.witness || ratio > r.measured) {
        r.measured = ratio;
        r.witness = MonitorResult::Witness{j, after.time};
      }
    }
  }
  return r.judge();
}

// ---------------------------------------------------------------------------

void WindowTrajectory::begin(const SimState& state, double K1, const KernelSpec& spec) {
  particles = state.ensemble.size();
  charges = state.charges.size();
  times.clear();
  distance.clear();
  radial_rate.clear();
  sqrt_h_start.assign(particles * charges, 0.0);
  for (std::size_t j = 0; j < particles; ++j) {
    for (std::size_t a = 0; a < charges; ++a) {
      sqrt_h_start[j * charges + a] = std::sqrt(pointwise_energy(state.ensemble[j], state.charges[a], K1, spec));
    }
  }
  append(state);
}

void WindowTrajectory::append(const SimState& state) {
  times.push_back(state.time);
  for (std::size_t j = 0; j < particles; ++j) {
    const auto& p = state.ensemble[j];
    for (const auto& c : state.charges) {
      const Vec3 dx = p.position - c.position;
      distance.push_back(norm(dx));
      radial_rate.push_back(dot(dx, p.velocity - c.velocity));
    }
  }
}

MonitorResult lemma_fac_monitor(const WindowTrajectory& tr, double Q_i, double tol, std::size_t window) {
  auto r = make_result("lemma_fac", window);
  r.bound = kLemmaFacConstant * Q_i * (1.0 + tol);
  const std::size_t s = tr.samples();
  if (tr.particles == 0 || tr.charges == 0) {
    r.skipped = true;
    return r.judge();
  }
  for (std::size_t j = 0; j < tr.particles; ++j) {
    for (std::size_t a = 0; a < tr.charges; ++a) {
      double integral = 0.0;
      for (std::size_t k = 0; k + 1 < s; ++k) {
        const double d0 = tr.dist(k, j, a), d1 = tr.dist(k + 1, j, a);
        integral += 0.5 * (1.0 / (d0 * d0) + 1.0 / (d1 * d1)) * (tr.times[k + 1] - tr.times[k]);
      }
      if (!r.witness || integral > r.measured) {
        r.measured = integral;
        r.witness = MonitorResult::Witness{j, tr.times.empty() ? 0.0 : tr.times.front()};
      }
    }
  }
  return r.judge();
}

SphereVisit sphere_visit(const WindowTrajectory& tr, std::size_t j, std::size_t a, double radius) {
  SphereVisit v;
  const std::size_t s = tr.samples();
  std::size_t k = 0;
  while (k < s) {
    if (!(tr.dist(k, j, a) < radius)) {
      ++k;
      continue;
    }
    const std::size_t first = k;
    while (k < s && tr.dist(k, j, a) < radius) ++k;
    const std::size_t last = k - 1;
    auto crossing = [&](std::size_t out, std::size_t in) {
      const double d_out = tr.dist(out, j, a), d_in = tr.dist(in, j, a);
      const double f = (d_out - radius) / (d_out - d_in);
      return tr.times[out] + f * (tr.times[in] - tr.times[out]);
    };
    const double entry = first == 0 ? tr.times.front() : crossing(first - 1, first);
    const double exit = last + 1 == s ? tr.times.back() : crossing(last + 1, last);
    ++v.intervals;
    v.measure += exit - entry;
  }
  return v;
}

ProtectionSphereReport protection_sphere_monitor(const WindowTrajectory& tr,
                                                 const AnalysisParameters& params, std::size_t window) {
  ProtectionSphereReport rep;
  rep.connectedness = make_result("protection_sphere", window);
  rep.connectedness.bound = 0.0;
  rep.min_convexity_ratio = kInf;
  const double q13 = std::pow(params.Q, 13.0 / 8.0);
  const double q15 = std::pow(params.Q, 15.0 / 8.0);
  const double convexity_floor = params.R * params.R / 8.0;
  std::size_t disconnected = 0;
  const std::size_t s = tr.samples();

  for (std::size_t j = 0; j < tr.particles; ++j) {
    for (std::size_t a = 0; a < tr.charges; ++a) {
      const double sh = tr.sqrt_h_start[j * tr.charges + a];
      if (sh > params.R) {
        ++rep.high_energy_pairs;
        const auto v = sphere_visit(tr, j, a, params.delta);
        if (v.intervals > 0) {
          ++rep.visits;
          rep.max_meas = std::max(rep.max_meas, v.measure);
          rep.max_constant = std::max(rep.max_constant, v.measure * q13);
        }
        if (v.intervals > 1) {
          ++disconnected;
          if (!rep.connectedness.witness) rep.connectedness.witness = MonitorResult::Witness{j, tr.times.front()};
        }
        for (std::size_t k = 1; k + 1 < s; ++k) {
          if (!(tr.dist(k, j, a) < params.delta)) continue;
          const double h1 = tr.times[k] - tr.times[k - 1];
          const double h2 = tr.times[k + 1] - tr.times[k];
          const double i0 = 0.5 * tr.dist(k - 1, j, a) * tr.dist(k - 1, j, a);
          const double i1 = 0.5 * tr.dist(k, j, a) * tr.dist(k, j, a);
          const double i2 = 0.5 * tr.dist(k + 1, j, a) * tr.dist(k + 1, j, a);
          const double second = 2.0 * ((i2 - i1) / h2 - (i1 - i0) / h1) / (h1 + h2);
          rep.min_convexity_ratio = std::min(rep.min_convexity_ratio, second / convexity_floor);
        }
      }
      if (sh > 0.5 * params.Q) {
        ++rep.fast_pairs;
        const auto v = sphere_visit(tr, j, a, 2.0 * params.delta);
        if (v.intervals > 0) {
          ++rep.fast_visits;
          rep.max_meas_wide = std::max(rep.max_meas_wide, v.measure);
          rep.max_constant_wide = std::max(rep.max_constant_wide, v.measure * q15);
        }
        if (v.intervals > 1) {
          ++disconnected;
          if (!rep.connectedness.witness) rep.connectedness.witness = MonitorResult::Witness{j, tr.times.front()};
        }
      }
    }
  }
  rep.connectedness.measured = static_cast<double>(disconnected);
  rep.connectedness.judge();
  return rep;
}

std::vector<VirialSample> virial_trace(std::span<const TrajectoryPoint> particle,
                                       std::span<const TrajectoryPoint> charge) {
  if (particle.size() != charge.size()) throw DomainError("virial_trace: trajectories differ in length");
  const std::size_t s = particle.size();
  std::vector<VirialSample> out(s);
  for (std::size_t k = 0; k < s; ++k) {
    const Vec3 dx = particle[k].position - charge[k].position;
    out[k].t = particle[k].t;
    out[k].I = 0.5 * norm2(dx);
    out[k].I_dot = dot(dx, particle[k].velocity - charge[k].velocity);
    out[k].I_ddot = std::numeric_limits<double>::quiet_NaN();
  }
  for (std::size_t k = 1; k + 1 < s; ++k) {
    const double h1 = out[k].t - out[k - 1].t;
    const double h2 = out[k + 1].t - out[k].t;
    out[k].I_ddot = 2.0 * ((out[k + 1].I - out[k].I) / h2 - (out[k].I - out[k - 1].I) / h1) / (h1 + h2);
  }
  return out;
}

double density_norm_estimate(const PlasmaEnsemble& ensemble, double cell_size) {
  if (!(cell_size > 0.0)) throw DomainError("density_norm_estimate: cell_size must be > 0");
  if (ensemble.empty()) return 0.0;
  Vec3 lo = ensemble[0].position, hi = lo;
  for (const auto& p : ensemble.particles()) {
    lo = {std::min(lo.x, p.position.x), std::min(lo.y, p.position.y), std::min(lo.z, p.position.z)};
    hi = {std::max(hi.x, p.position.x), std::max(hi.y, p.position.y), std::max(hi.z, p.position.z)};
  }
  auto cells = [&](double extent) {
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(extent / cell_size)));
  };
  const std::int64_t nx = cells(hi.x - lo.x), ny = cells(hi.y - lo.y), nz = cells(hi.z - lo.z);
  auto index = [&](double v, double origin, std::int64_t n) {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((v - origin) / cell_size)), 0, n - 1);
  };
  std::unordered_map<std::int64_t, double> mass;
  for (const auto& p : ensemble.particles()) {
    const auto key = (index(p.position.z, lo.z, nz) * ny + index(p.position.y, lo.y, ny)) * nx +
                     index(p.position.x, lo.x, nx);
    mass[key] += p.weight;
  }
  const double volume = cell_size * cell_size * cell_size;
  double sum = 0.0;
  for (const auto& [key, m] : mass) sum += std::pow(m / volume, 5.0 / 3.0) * volume;
  return std::pow(sum, 3.0 / 5.0);
}

double envelope_constant(double Q0, std::span<const std::pair<double, double>> samples) {
  double worst = 0.0;
  for (const auto& [t, Q] : samples) {
    if (!(Q > Q0)) continue;
    auto envelope = [&](double C) { return (Q0 + C) * std::exp(C * (1.0 + t)); };
    double lo = 0.0, hi = Q - Q0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (envelope(mid) >= Q ? hi : lo) = mid;
    }
    worst = std::max(worst, hi);
  }
  return worst;
}

// ---------------------------------------------------------------------------

MonitorResult VelocityEnergyBoundMonitor::check(const SubstepView& view) {
  auto r = velocity_energy_bound_check(view.after, K1_, view.kernel);
  r.window = view.window;
  return r;
}

MonitorResult EtaBoundMonitor::check(const SubstepView& view) {
  auto r = eta_bound_check(view.after, H0_, tol_);
  r.window = view.window;
  return r;
}

MonitorResult SeparationMonitor::check(const SubstepView& view) {
  auto r = separation_check(view.after, H0_, tol_);
  r.window = view.window;
  return r;
}

MonitorResult SqrtHVariationMonitor::check(const SubstepView& view) {
  return sqrt_h_variation_check(view, K1_, tol_, tol_field_);
}

}  // namespace vpc
