#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vpc/kernels.hpp"
#include "vpc/state.hpp"
#include "vpc/vec3.hpp"

namespace vpc {

/// How the plasma self-field E is evaluated. `none` switches E off entirely
/// (test-particle runs); the charge field F is always evaluated.
enum class FieldMethod { direct, barnes_hut, none };

struct FieldSolverConfig {
  FieldMethod method = FieldMethod::direct;
  double theta = 0.5;           ///< Barnes-Hut opening angle; 0 means exact traversal
  std::size_t leaf_capacity = 8;
  KernelSpec kernel;
  unsigned threads = 1;

  void validate() const;

  friend bool operator==(const FieldSolverConfig&, const FieldSolverConfig&) = default;
};

/// E at arbitrary targets: sum_j w_j K_p(x - x_j), Plummer kernel K_p.
/// No self-exclusion; a target on a source with eps_p = 0 is a DomainError.
std::vector<Vec3> plasma_field_direct(std::span<const Vec3> targets, const PlasmaEnsemble& ensemble,
                                      const KernelSpec& spec, unsigned threads = 1);

/// E at every particle of the ensemble, excluding the self term by index.
/// Pairwise antisymmetric summation in fixed index order; the result is
/// bitwise independent of `threads`.
std::vector<Vec3> plasma_self_field_direct(const PlasmaEnsemble& ensemble, const KernelSpec& spec,
                                           unsigned threads = 1);

/// Monopole Barnes-Hut octree over a fixed ensemble. Immutable once built.
class Octree {
 public:
  struct Node {
    Vec3 center;                ///< cube center
    double half_width = 0.0;
    double weight = 0.0;
    Vec3 centroid;              ///< weight centroid (cube center if weight is 0)
    std::int32_t first_child = -1;  ///< index of 8 consecutive children, -1 for leaves
    std::uint32_t begin = 0;    ///< range into order() covered by this node
    std::uint32_t end = 0;

    bool is_leaf() const { return first_child < 0; }
  };

  Octree(const PlasmaEnsemble& ensemble, std::size_t leaf_capacity = 8);

  /// Field at x; `exclude` is a particle index skipped in leaves (or -1).
  Vec3 field_at(const Vec3& x, double theta, const KernelSpec& spec,
                std::int64_t exclude = -1) const;

  std::span<const Node> nodes() const { return nodes_; }
  /// Particle indices grouped by node range.
  std::span<const std::uint32_t> order() const { return order_; }
  std::size_t leaf_capacity() const { return leaf_capacity_; }

 private:
  void split(std::size_t node_index, int depth);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<Vec3> positions_;
  std::vector<double> weights_;
  std::size_t leaf_capacity_;
};

/// Field evaluation results for one snapshot, as consumed by the integrator
/// and the monitors.
struct Accelerations {
  std::vector<Vec3> plasma;     ///< E at each particle (self-excluded)
  std::vector<Vec3> particles;  ///< E + F at each particle
  std::vector<Vec3> charges;    ///< total acceleration of each charge
};

/// Barnes-Hut E at arbitrary targets (no self-exclusion).
std::vector<Vec3> plasma_field_tree(std::span<const Vec3> targets, const PlasmaEnsemble& ensemble,
                                    const FieldSolverConfig& config);

/// Barnes-Hut E at every particle, excluding the self term by index.
std::vector<Vec3> plasma_self_field_tree(const PlasmaEnsemble& ensemble,
                                         const FieldSolverConfig& config);

/// E at every particle with the configured method (zeros for `none`).
std::vector<Vec3> plasma_self_field(const PlasmaEnsemble& ensemble, const FieldSolverConfig& config);

/// F(x) = sum_a regularized_charge_force(x - xi_a).
Vec3 charge_field(const Vec3& x, std::span<const ChargeState> charges, const KernelSpec& spec);

/// Plasma field felt by a charge at xi: sum_j w_j regularized_charge_force(xi - x_j).
/// The charge couples to the plasma through the same kernel the plasma feels
/// from it, so the discrete system keeps a conserved energy.
Vec3 plasma_field_at_charge(const Vec3& xi, const PlasmaEnsemble& ensemble, const KernelSpec& spec);

/// Acceleration of charge alpha: plasma field (zero for method `none`) plus the
/// bare Coulomb push of every other charge. Throws DomainError on coincident charges.
Vec3 field_on_charge(std::size_t alpha, const SimState& state, const FieldSolverConfig& config);

/// sum over particles with |v_j| < R of w_j / (|x - x_j|^2 + eps_p^2).
double static_field_bound(const PlasmaEnsemble& ensemble, const Vec3& x, double R,
                          const KernelSpec& spec);

/// static_field_bound at several R for one probe, in a single pass.
std::vector<double> static_field_bound_profile(const PlasmaEnsemble& ensemble, const Vec3& x,
                                               std::span<const double> radii,
                                               const KernelSpec& spec);

/// Error of an approximate field against a reference, target by target.
struct FieldComparison {
  double max_relative = 0.0;  ///< max_j |approx_j - ref_j| / |ref_j|
  double max_absolute = 0.0;
  double rms_relative = 0.0;
  std::size_t worst = 0;      ///< target with the largest relative error
};

FieldComparison compare_fields(std::span<const Vec3> approx, std::span<const Vec3> reference);

}  // namespace vpc
