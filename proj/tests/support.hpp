#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "vpc/state.hpp"
#include "vpc/vec3.hpp"

namespace testing {

// Small hand-rolled generator for property tests. Every property loops over
// a fixed number of cases drawn from a seeded engine so failures replay.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53);
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

  vpc::Vec3 in_cube(double half) { return {uniform(-half, half), uniform(-half, half), uniform(-half, half)}; }
  vpc::Vec3 in_ball(double r) {
    for (;;) {
      const vpc::Vec3 v = in_cube(r);
      if (vpc::norm(v) <= r) return v;
    }
  }
  vpc::Vec3 direction() {
    for (;;) {
      const vpc::Vec3 v = in_cube(1.0);
      const double n = vpc::norm(v);
      if (n > 1e-3 && n <= 1.0) return v / n;
    }
  }

  vpc::PlasmaEnsemble ensemble(std::size_t m, double radius, double v_max, bool equal_weights = true) {
    std::vector<vpc::Macroparticle> ps;
    for (std::size_t j = 0; j < m; ++j) {
      const double w = equal_weights ? 1.0 / static_cast<double>(m) : uniform(0.1, 1.0) / static_cast<double>(m);
      ps.push_back({in_ball(radius), in_ball(v_max), w});
    }
    return vpc::PlasmaEnsemble(std::move(ps));
  }

  std::vector<vpc::ChargeState> charges(std::size_t n, double radius, double v_max) {
    std::vector<vpc::ChargeState> cs;
    for (std::size_t a = 0; a < n; ++a) cs.push_back({in_ball(radius), in_ball(v_max)});
    return cs;
  }

 private:
  std::mt19937_64 engine_;
};

inline double rel_diff(const vpc::Vec3& a, const vpc::Vec3& b) {
  const double scale = std::max(vpc::norm(a), vpc::norm(b));
  return scale > 0.0 ? vpc::norm(a - b) / scale : 0.0;
}

}  // namespace testing
