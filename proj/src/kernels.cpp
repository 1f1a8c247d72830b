#include "vpc/kernels.hpp"

#include <cmath>

#include "vpc/errors.hpp"

namespace vpc {

void KernelSpec::validate() const {
  if (mode == KernelMode::regularized && !(epsilon_charge > 0.0 && std::isfinite(epsilon_charge))) {
    throw ConfigError("kernel: epsilon must be > 0 in regularized mode");
  }
  if (!(epsilon_plasma >= 0.0 && std::isfinite(epsilon_plasma))) {
    throw ConfigError("kernel: epsilon_plasma must be >= 0");
  }
}

Vec3 coulomb_force(const Vec3& r) {
  const double r2 = norm2(r);
  if (r2 == 0.0) throw DomainError("coulomb_force at r = 0");
  return detail::coulomb_unchecked(r, r2);
}

double coulomb_potential(const Vec3& r) {
  const double r2 = norm2(r);
  if (r2 == 0.0) throw DomainError("coulomb_potential at r = 0");
  return 1.0 / std::sqrt(r2);
}

Vec3 regularized_charge_force(const Vec3& r, const KernelSpec& spec) {
  if (spec.mode == KernelMode::exact) return coulomb_force(r);
  const double eps = spec.epsilon_charge;
  const double r2 = norm2(r);
  if (std::sqrt(r2) >= eps) return detail::coulomb_unchecked(r, r2);
  return r * (1.0 / (eps * eps * eps));
}

double regularized_charge_potential(const Vec3& r, const KernelSpec& spec) {
  if (spec.mode == KernelMode::exact) return coulomb_potential(r);
  const double eps = spec.epsilon_charge;
  const double r2 = norm2(r);
  const double d = std::sqrt(r2);
  if (d >= eps) return 1.0 / d;
  return (3.0 * eps * eps - r2) / (2.0 * eps * eps * eps);
}

Vec3 softened_plasma_force(const Vec3& r, const KernelSpec& spec) {
  const double s2 = norm2(r) + spec.epsilon_plasma * spec.epsilon_plasma;
  if (s2 == 0.0) throw DomainError("softened_plasma_force at r = 0 with epsilon_plasma = 0");
  return r * (1.0 / (s2 * std::sqrt(s2)));
}

double softened_plasma_potential(const Vec3& r, const KernelSpec& spec) {
  const double s2 = norm2(r) + spec.epsilon_plasma * spec.epsilon_plasma;
  if (s2 == 0.0) throw DomainError("softened_plasma_potential at r = 0 with epsilon_plasma = 0");
  return 1.0 / std::sqrt(s2);
}

}  // namespace vpc
