#pragma once

#include "vpc/vec3.hpp"

namespace vpc {

enum class KernelMode { exact, regularized };

/// Interaction kernel parameters.
///
/// epsilon_charge is the radius inside which the plasma-charge Coulomb kernel
/// is replaced by the field of a uniformly charged sphere; outside it the
/// kernel is the bare one, bit for bit. epsilon_plasma is the Plummer
/// softening of the plasma self-field and is independent of epsilon_charge.
struct KernelSpec {
  double epsilon_charge = 0.05;
  double epsilon_plasma = 0.0;
  KernelMode mode = KernelMode::regularized;

  /// Throws ConfigError when the invariants above are violated.
  void validate() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// r / |r|^3. Throws DomainError at r = 0.
Vec3 coulomb_force(const Vec3& r);

/// 1 / |r|. Throws DomainError at r = 0.
double coulomb_potential(const Vec3& r);

/// r / |r|^3 for |r| >= eps, r / eps^3 inside. Total function in regularized
/// mode; identical to coulomb_force in exact mode.
Vec3 regularized_charge_force(const Vec3& r, const KernelSpec& spec);

/// 1 / |r| for |r| >= eps, (3 eps^2 - |r|^2) / (2 eps^3) inside. Its negative
/// gradient is regularized_charge_force.
double regularized_charge_potential(const Vec3& r, const KernelSpec& spec);

/// Plummer kernel r / (|r|^2 + eps_p^2)^{3/2}. Throws DomainError when r = 0
/// and eps_p = 0.
Vec3 softened_plasma_force(const Vec3& r, const KernelSpec& spec);

/// 1 / sqrt(|r|^2 + eps_p^2), the potential of softened_plasma_force.
double softened_plasma_potential(const Vec3& r, const KernelSpec& spec);

namespace detail {

// Shared by every Coulomb evaluation so the exact-tail branch of the
// regularized kernel is the same instruction sequence as coulomb_force.
inline Vec3 coulomb_unchecked(const Vec3& r, double r2) {
  const double inv3 = 1.0 / (r2 * std::sqrt(r2));
  return r * inv3;
}

}  // namespace detail

}  // namespace vpc
