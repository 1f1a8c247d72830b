#include "vpc/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vpc/errors.hpp"

namespace vpc {

PlasmaEnsemble::PlasmaEnsemble(std::vector<Macroparticle> particles)
    : particles_(std::move(particles)) {
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    const auto& p = particles_[i];
    if (!(p.weight >= 0.0) || !std::isfinite(p.weight)) {
      throw DomainError("particle " + std::to_string(i) + " has invalid weight");
    }
    if (!is_finite(p.position) || !is_finite(p.velocity)) {
      throw DomainError("particle " + std::to_string(i) + " has a non-finite coordinate");
    }
    total_weight_ += p.weight;
  }
}

double min_charge_distance(const SimState& state) {
  if (state.ensemble.empty() || state.charges.empty()) {
    throw DomainError("min_charge_distance needs at least one particle and one charge");
  }
  double best2 = std::numeric_limits<double>::infinity();
  for (const auto& c : state.charges) {
    for (const auto& p : state.ensemble.particles()) {
      best2 = std::min(best2, norm2(p.position - c.position));
    }
  }
  return std::sqrt(best2);
}

double min_charge_separation(const SimState& state) {
  const auto& q = state.charges;
  if (q.size() < 2) throw DomainError("min_charge_separation needs at least two charges");
  double best2 = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < q.size(); ++a) {
    for (std::size_t b = a + 1; b < q.size(); ++b) {
      best2 = std::min(best2, norm2(q[a].position - q[b].position));
    }
  }
  return std::sqrt(best2);
}

double max_speed(const SimState& state) {
  if (state.ensemble.empty()) throw DomainError("max_speed of an empty ensemble");
  double best2 = 0.0;
  for (const auto& p : state.ensemble.particles()) best2 = std::max(best2, norm2(p.velocity));
  return std::sqrt(best2);
}

void validate(const SimState& state) {
  if (!std::isfinite(state.time)) throw DomainError("non-finite time");
  for (std::size_t a = 0; a < state.charges.size(); ++a) {
    const auto& c = state.charges[a];
    if (!is_finite(c.position) || !is_finite(c.velocity)) {
      throw DomainError("charge " + std::to_string(a) + " has a non-finite coordinate");
    }
    for (std::size_t j = 0; j < state.ensemble.size(); ++j) {
      if (state.ensemble[j].position == c.position) {
        throw DomainError("particle " + std::to_string(j) + " coincides with charge " +
                          std::to_string(a));
      }
    }
  }
}

}  // namespace vpc
