#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vpc/vec3.hpp"

namespace vpc {

/// One weighted sample of the plasma phase-space density.
struct Macroparticle {
  Vec3 position;
  Vec3 velocity;
  double weight = 0.0;

  friend bool operator==(const Macroparticle&, const Macroparticle&) = default;
};

/// Position and velocity of a unit point charge.
struct ChargeState {
  Vec3 position;
  Vec3 velocity;

  friend bool operator==(const ChargeState&, const ChargeState&) = default;
};

/// Ordered macroparticle list. Index is identity; weights never change after
/// construction, so the cached total stays exact.
class PlasmaEnsemble {
 public:
  PlasmaEnsemble() = default;

  /// Throws DomainError on a negative weight or a non-finite coordinate.
  explicit PlasmaEnsemble(std::vector<Macroparticle> particles);

  std::span<const Macroparticle> particles() const { return particles_; }
  std::size_t size() const { return particles_.size(); }
  bool empty() const { return particles_.empty(); }
  double total_weight() const { return total_weight_; }

  const Macroparticle& operator[](std::size_t i) const { return particles_[i]; }

  /// Moves particle i in phase space. Weight is not reachable from here.
  void set_phase(std::size_t i, const Vec3& position, const Vec3& velocity) {
    particles_[i].position = position;
    particles_[i].velocity = velocity;
  }

  friend bool operator==(const PlasmaEnsemble&, const PlasmaEnsemble&) = default;

 private:
  std::vector<Macroparticle> particles_;
  double total_weight_ = 0.0;
};

/// Full system snapshot: plasma ensemble plus N >= 0 point charges at time t.
struct SimState {
  double time = 0.0;
  PlasmaEnsemble ensemble;
  std::vector<ChargeState> charges;

  friend bool operator==(const SimState&, const SimState&) = default;
};

/// Min over particles j and charges a of |x_j - xi_a|. Needs >= 1 of each.
double min_charge_distance(const SimState& state);

/// Min over charge pairs of |xi_a - xi_b|. Needs N >= 2.
double min_charge_separation(const SimState& state);

/// Max particle speed, P(t). Needs a nonempty ensemble.
double max_speed(const SimState& state);

/// Checks finiteness of every coordinate and that no particle sits on a charge.
void validate(const SimState& state);

}  // namespace vpc
