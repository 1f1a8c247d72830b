#pragma once

#include <cstdint>
#include <vector>

#include "vpc/kernels.hpp"
#include "vpc/state.hpp"

namespace vpc {

enum class SpatialShape { ball, shell, box };
enum class VelocityShape { uniform_ball, truncated_maxwellian };

/// Recipe for an initial plasma with a vacuum island of radius
/// `vacuum_radius` around every charge.
struct InitialCondition {
  SpatialShape spatial = SpatialShape::ball;
  Vec3 center{};
  double radius = 1.0;   ///< ball and shell outer radius
  double r_inner = 0.5;  ///< shell inner radius
  Vec3 box_min{-1.0, -1.0, -1.0};
  Vec3 box_max{1.0, 1.0, 1.0};

  VelocityShape velocity = VelocityShape::uniform_ball;
  double v_max = 1.0;
  double sigma = 1.0;  ///< Maxwellian thermal speed

  std::size_t M = 1000;
  double vacuum_radius = 0.3;
  std::vector<ChargeState> charges;
  std::uint64_t seed = 1;

  /// Throws ConfigError on bad geometry, vacuum_radius <= eps, or
  /// coincident charges.
  void validate(const KernelSpec& spec) const;

  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

/// M particles of weight 1/M, positions rejection-sampled from the shape
/// minus the vacuum balls, velocities from the velocity shape. Throws
/// ConfigError when the acceptance rate drops below 1e-3.
SimState sample(const InitialCondition& ic);

/// compute_Q on the sampled state.
double initial_Q(const SimState& state, double K1, const KernelSpec& spec);

/// Volume of the spatial shape (vacuum balls not subtracted).
double support_volume(const InitialCondition& ic);

/// (support volume / M)^{1/3}.
double mean_spacing(const InitialCondition& ic);

}  // namespace vpc
