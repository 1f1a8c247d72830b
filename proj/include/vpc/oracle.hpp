#pragma once

#include <span>
#include <vector>

#include "vpc/dynamics.hpp"
#include "vpc/field.hpp"
#include "vpc/kernels.hpp"
#include "vpc/state.hpp"

namespace vpc {

/// One particle and one unit repulsive charge with bare Coulomb coupling.
/// A fixed charge stays at xi. A mobile charge feels the particle with
/// strength particle_weight, matching a one-particle ensemble.
struct TwoBodyProblem {
  Vec3 x;
  Vec3 v;
  Vec3 xi;
  Vec3 eta;
  bool charge_mobile = false;
  double particle_weight = 1.0;

  void validate() const;
};

struct TwoBodySample {
  double t = 0.0;
  Vec3 x;
  Vec3 v;
  Vec3 xi;
  Vec3 eta;
};

/// RKF78 integration with local error control `tolerance` (<= 1e-10),
/// reported at `times`, which run monotonically from 0 toward T (T may be
/// negative). Empty `times` means {0, T}.
std::vector<TwoBodySample> two_body_reference(const TwoBodyProblem& problem, double T, double tolerance,
                                              std::vector<double> times = {});

/// Conserved energy: 1/2 |v|^2 + 1/r for a fixed charge, else
/// w (1/2 |v|^2 + 1/r) + 1/2 |eta|^2.
double two_body_energy(const TwoBodyProblem& problem, const TwoBodySample& s);
/// Conserved angular momentum about the origin (fixed charge: about xi).
Vec3 two_body_angular_momentum(const TwoBodyProblem& problem, const TwoBodySample& s);

/// Closest approach of a head-on approach with relative speed u at
/// separation d0 when the relative acceleration is mu r / |r|^3.
double head_on_pericenter(double d0, double u, double mu = 1.0);

/// The problem as a simulator state: one particle and one charge. A fixed
/// charge becomes a charge at rest that the particle does not push
/// (weight 0).
SimState to_sim_state(const TwoBodyProblem& problem);

/// Plasma field sum_k w_k (x - x_k) / (|x - x_k|^2 + eps_p^2)^{3/2} by a
/// plain double loop.
std::vector<Vec3> field_brute_force(std::span<const Vec3> targets, const PlasmaEnsemble& ensemble,
                                    const KernelSpec& spec);

/// Largest position difference over all particles and charges.
double max_position_difference(const SimState& a, const SimState& b);

// ---------------------------------------------------------------------------
// Convergence studies

struct EpsilonPair {
  double eps_coarse = 0.0;
  double eps_fine = 0.0;
  double charge_sup_diff = 0.0;     ///< sup over samples and charges of |xi_coarse - xi_fine|
  double particle_mean_diff = 0.0;  ///< sup over samples of the mean matched-particle distance
  bool comparable = false;          ///< both runs stayed outside their own eps-balls
};

struct EpsilonStudyReport {
  std::vector<double> epsilons;
  std::vector<double> min_charge_distance;
  std::vector<std::size_t> substeps;
  std::vector<EpsilonPair> pairs;  ///< consecutive levels
};

/// Runs `initial` to T once per epsilon (same initial state for all) and
/// compares consecutive levels at `samples` equally spaced times. Requires
/// the initial particle-charge distance to exceed 4 max(epsilons).
EpsilonStudyReport epsilon_convergence_study(const SimState& initial, const FieldSolverConfig& field,
                                             const IntegratorConfig& integrator,
                                             std::span<const double> epsilons, double T,
                                             std::size_t samples = 64);

struct DtRun {
  double dt = 0.0;
  std::size_t substeps = 0;
  double min_charge_bound = 0.0;
  bool unstable = false;          ///< dt exceeded the charge bound somewhere
  double error_vs_finest = 0.0;   ///< max position difference at T
  double increment = 0.0;         ///< difference to the next finer level (NaN for the finest)
  SimState final_state;
};

struct DtStudyReport {
  std::vector<DtRun> runs;  ///< coarse to fine
  double order = 0.0;       ///< least-squares slope of log increment vs log dt (NaN if < 2 points)
  std::size_t fit_points = 0;
};

/// Fixed-step runs of `initial` to T for each dt. Unstable levels are
/// reported but left out of the order fit.
DtStudyReport dt_convergence_study(const SimState& initial, const FieldSolverConfig& field,
                                   const IntegratorConfig& integrator, std::span<const double> dts,
                                   double T);

}  // namespace vpc
