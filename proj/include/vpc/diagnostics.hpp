#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "vpc/kernels.hpp"
#include "vpc/monitor.hpp"
#include "vpc/state.hpp"

namespace vpc {

/// Components of the discrete total energy H. Every component is >= 0 for
/// the repulsive system.
struct EnergyReport {
  double kinetic_plasma = 0.0;
  double kinetic_charges = 0.0;
  double plasma_charge_potential = 0.0;  ///< sum_a sum_j w_j phi_eps(x_j - xi_a)
  double plasma_plasma_potential = 0.0;  ///< 1/2 sum_{j != k} w_j w_k phi_p(x_j - x_k)
  double charge_charge_potential = 0.0;  ///< 1/2 sum_{a != b} 1 / |xi_a - xi_b|
  double total = 0.0;
};

/// Discrete H of the regularized system. Throws DomainError on coincident charges.
EnergyReport total_energy(const SimState& state, const KernelSpec& spec, unsigned threads = 1);

/// K1 = max(8 H, 1).
double default_K1(double H);

/// Per-window quantities derived from Q: R = Q^{3/4}, delta = Q^{-7/8},
/// l = Q^{-2}, Delta_T = 1 / (K2 Q).
struct AnalysisParameters {
  double Q = 0.0;
  double delta_T = 0.0;
  double R = 0.0;
  double delta = 0.0;
  double l = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;

  static AnalysisParameters from_Q(double Q, double K1, double K2);
};

/// h = |v - eta|^2 / 2 + phi_eps(x - xi) + K1.
double pointwise_energy(const Macroparticle& particle, const ChargeState& charge, double K1,
                        const KernelSpec& spec);

/// max over particles and charges of sqrt(h_a). Needs N >= 1 and M >= 1.
double compute_Q(const SimState& state, double K1, const KernelSpec& spec);

/// |v_j| <= 2 sqrt(h_a(x_j, v_j)) for all j, a. measured is the worst ratio
/// |v| / (2 sqrt h), bound 1.
MonitorResult velocity_energy_bound_check(const SimState& state, double K1, const KernelSpec& spec);

/// |eta_a| <= sqrt(2 H0) (1 + tol).
MonitorResult eta_bound_check(const SimState& state, double H0, double tol = 0.0);

/// min charge separation >= (1 / (2 H0)) (1 - tol). Skipped for N < 2.
MonitorResult separation_check(const SimState& state, double H0, double tol = 1e-2);

/// Per-substep change of sqrt(h_a) against the smooth-field budget
/// (|S(X)| + |S(xi_a)| + tol_field) dt (1 + tol), where S is the field of
/// everything except charge a. measured is the worst ratio change / budget.
MonitorResult sqrt_h_variation_check(const SubstepView& view, double K1, double tol,
                                     double tol_field);

// ---------------------------------------------------------------------------
// Window trajectories

/// Samples of every particle-charge pair over one analysis window.
/// distance and radial_rate are stored [sample][particle][charge].
struct WindowTrajectory {
  std::size_t particles = 0;
  std::size_t charges = 0;
  std::vector<double> times;
  std::vector<double> distance;     ///< |Y - xi|
  std::vector<double> radial_rate;  ///< (Y - xi) . (W - eta), the virial rate
  std::vector<double> sqrt_h_start; ///< sqrt(h_a) at the window start, [particle][charge]

  /// Starts a window at `state` (clears previous samples).
  void begin(const SimState& state, double K1, const KernelSpec& spec);
  void append(const SimState& state);

  std::size_t samples() const { return times.size(); }
  double dist(std::size_t s, std::size_t j, std::size_t a) const {
    return distance[(s * particles + j) * charges + a];
  }
  double rate(std::size_t s, std::size_t j, std::size_t a) const {
    return radial_rate[(s * particles + j) * charges + a];
  }
};

inline constexpr double kLemmaFacConstant = 2.8284271247461903 + 1.0;  // 2 sqrt(2) + 1

/// Trapezoid estimate of int dt / |Y - xi|^2 over the window for every pair,
/// checked against (2 sqrt 2 + 1) Q_i (1 + tol).
MonitorResult lemma_fac_monitor(const WindowTrajectory& trajectory, double Q_i, double tol = 0.05,
                                std::size_t window = 0);

/// Visit-set statistics of the protection spheres of one window.
struct ProtectionSphereReport {
  MonitorResult connectedness;   ///< measured = number of visit sets with more than one interval
  std::size_t high_energy_pairs = 0;  ///< sqrt h(t_{i-1}) > R_i
  std::size_t visits = 0;             ///< high-energy pairs that entered B(xi, delta_i)
  double max_meas = 0.0;              ///< max meas(J) at radius delta_i
  double max_constant = 0.0;          ///< max meas(J) Q^{13/8}
  std::size_t fast_pairs = 0;         ///< sqrt h(t_{i-1}) > Q_i / 2
  std::size_t fast_visits = 0;
  double max_meas_wide = 0.0;         ///< max meas(J) at radius 2 delta_i
  double max_constant_wide = 0.0;     ///< max meas(J) Q^{15/8}
  double min_convexity_ratio = 0.0;   ///< min of discrete I'' / (R_i^2 / 8) inside the sphere (inf if unsampled)
};

/// Time spent inside B(xi, radius) for one pair: number of separate visit
/// intervals and their total length, crossing times interpolated linearly.
struct SphereVisit {
  std::size_t intervals = 0;
  double measure = 0.0;
};
SphereVisit sphere_visit(const WindowTrajectory& trajectory, std::size_t j, std::size_t a,
                         double radius);

ProtectionSphereReport protection_sphere_monitor(const WindowTrajectory& trajectory,
                                                 const AnalysisParameters& params,
                                                 std::size_t window = 0);

/// One trajectory sample of a body.
struct TrajectoryPoint {
  double t = 0.0;
  Vec3 position;
  Vec3 velocity;
};

/// Virial function I = |Y - xi|^2 / 2, its rate (Y - xi).(W - eta) and the
/// discrete second difference of I (NaN at the two ends).
struct VirialSample {
  double t = 0.0;
  double I = 0.0;
  double I_dot = 0.0;
  double I_ddot = 0.0;
};
std::vector<VirialSample> virial_trace(std::span<const TrajectoryPoint> particle,
                                       std::span<const TrajectoryPoint> charge);

/// L^{5/3} norm of a histogram density on a uniform grid of the bounding box.
double density_norm_estimate(const PlasmaEnsemble& ensemble, double cell_size);

/// Smallest C with Q(t) <= (Q0 + C) exp(C (1 + t)) at every sample (t, Q).
double envelope_constant(double Q0, std::span<const std::pair<double, double>> samples);

// ---------------------------------------------------------------------------
// Substep monitors

class VelocityEnergyBoundMonitor final : public SubstepMonitor {
 public:
  explicit VelocityEnergyBoundMonitor(double K1) : K1_(K1) {}
  std::string_view name() const override { return "velocity_energy_bound"; }
  MonitorResult check(const SubstepView& view) override;

 private:
  double K1_;
};

class EtaBoundMonitor final : public SubstepMonitor {
 public:
  EtaBoundMonitor(double H0, double tol) : H0_(H0), tol_(tol) {}
  std::string_view name() const override { return "eta_bound"; }
  MonitorResult check(const SubstepView& view) override;

 private:
  double H0_, tol_;
};

class SeparationMonitor final : public SubstepMonitor {
 public:
  SeparationMonitor(double H0, double tol) : H0_(H0), tol_(tol) {}
  std::string_view name() const override { return "separation"; }
  MonitorResult check(const SubstepView& view) override;

 private:
  double H0_, tol_;
};

class SqrtHVariationMonitor final : public SubstepMonitor {
 public:
  SqrtHVariationMonitor(double K1, double tol, double tol_field)
      : K1_(K1), tol_(tol), tol_field_(tol_field) {}
  std::string_view name() const override { return "sqrt_h_variation"; }
  MonitorResult check(const SubstepView& view) override;

 private:
  double K1_, tol_, tol_field_;
};

}  // namespace vpc
