#include "vpc/sampling.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "vpc/diagnostics.hpp"
#include "vpc/errors.hpp"

namespace vpc {

namespace {

constexpr std::size_t kMinTrials = 10000;
constexpr double kMinAcceptance = 1e-3;

// The standard distributions are implementation-defined; these are not, so
// a seed means the same ensemble on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

class Acceptance {
 public:
  explicit Acceptance(const char* what) : what_(what) {}
  void trial(bool accepted) {
    ++trials_;
    if (accepted) ++accepted_;
    if (trials_ >= kMinTrials &&
        static_cast<double>(accepted_) < kMinAcceptance * static_cast<double>(trials_)) {
      throw ConfigError(std::string("sample: ") + what_ + " acceptance rate below 1e-3 after " +
                        std::to_string(trials_) + " trials");
    }
  }

 private:
  const char* what_;
  std::size_t trials_ = 0;
  std::size_t accepted_ = 0;
};

Vec3 in_cube(Rng& rng, const Vec3& center, double half) {
  return {center.x + rng.uniform(-half, half), center.y + rng.uniform(-half, half),
          center.z + rng.uniform(-half, half)};
}

bool in_shape(const InitialCondition& ic, const Vec3& x) {
  switch (ic.spatial) {
    case SpatialShape::ball:
      return norm(x - ic.center) <= ic.radius;
    case SpatialShape::shell: {
      const double r = norm(x - ic.center);
      return r >= ic.r_inner && r <= ic.radius;
    }
    case SpatialShape::box:
      return true;
  }
  return false;
}

Vec3 candidate_position(const InitialCondition& ic, Rng& rng) {
  if (ic.spatial == SpatialShape::box) {
    return {rng.uniform(ic.box_min.x, ic.box_max.x), rng.uniform(ic.box_min.y, ic.box_max.y),
            rng.uniform(ic.box_min.z, ic.box_max.z)};
  }
  return in_cube(rng, ic.center, ic.radius);
}

bool outside_vacuum(const InitialCondition& ic, const Vec3& x) {
  for (const auto& c : ic.charges) {
    if (norm(x - c.position) < ic.vacuum_radius) return false;
  }
  return true;
}

Vec3 sample_velocity(const InitialCondition& ic, Rng& rng, Acceptance& acc) {
  if (ic.v_max == 0.0) return {};
  for (;;) {
    Vec3 v;
    if (ic.velocity == VelocityShape::uniform_ball) {
      v = in_cube(rng, {}, ic.v_max);
    } else {
      v = {ic.sigma * rng.normal(), ic.sigma * rng.normal(), ic.sigma * rng.normal()};
    }
    const bool ok = norm(v) <= ic.v_max;
    acc.trial(ok);
    if (ok) return v;
  }
}

}  // namespace

void InitialCondition::validate(const KernelSpec& spec) const {
  if (!is_finite(center) || !is_finite(box_min) || !is_finite(box_max)) throw ConfigError("initial: non-finite geometry");
  switch (spatial) {
    case SpatialShape::ball:
      if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("initial: radius must be > 0");
      break;
    case SpatialShape::shell:
      if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("initial: radius must be > 0");
      if (!(r_inner >= 0.0 && r_inner < radius)) throw ConfigError("initial: need 0 <= r_inner < radius");
      break;
    case SpatialShape::box:
      if (!(box_min.x < box_max.x && box_min.y < box_max.y && box_min.z < box_max.z)) {
        throw ConfigError("initial: box_min must be below box_max in every coordinate");
      }
      break;
  }
  if (!(v_max >= 0.0) || !std::isfinite(v_max)) throw ConfigError("initial: v_max must be >= 0");
  if (velocity == VelocityShape::truncated_maxwellian && (!(sigma > 0.0) || !std::isfinite(sigma))) {
    throw ConfigError("initial: sigma must be > 0");
  }
  if (!std::isfinite(vacuum_radius) || !(vacuum_radius > spec.epsilon_charge)) {
    throw ConfigError("initial: vacuum_radius must exceed epsilon_charge");
  }
  for (std::size_t a = 0; a < charges.size(); ++a) {
    if (!is_finite(charges[a].position) || !is_finite(charges[a].velocity)) {
      throw ConfigError("initial: charge " + std::to_string(a) + " has a non-finite coordinate");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (charges[a].position == charges[b].position) {
        throw ConfigError("initial: charges " + std::to_string(b) + " and " + std::to_string(a) +
                          " share a position");
      }
    }
  }
}

SimState sample(const InitialCondition& ic) {
  Rng rng(ic.seed);
  Acceptance position_acc("position");
  Acceptance velocity_acc("velocity");
  std::vector<Macroparticle> particles;
  particles.reserve(ic.M);
  const double w = ic.M > 0 ? 1.0 / static_cast<double>(ic.M) : 0.0;
  while (particles.size() < ic.M) {
    const Vec3 x = candidate_position(ic, rng);
    const bool ok = in_shape(ic, x) && outside_vacuum(ic, x);
    position_acc.trial(ok);
    if (!ok) continue;
    particles.push_back({x, sample_velocity(ic, rng, velocity_acc), w});
  }
  SimState state;
  state.ensemble = PlasmaEnsemble(std::move(particles));
  state.charges = ic.charges;
  return state;
}

double initial_Q(const SimState& state, double K1, const KernelSpec& spec) { return compute_Q(state, K1, spec); }

double support_volume(const InitialCondition& ic) {
  constexpr double c = 4.0 / 3.0 * std::numbers::pi;
  switch (ic.spatial) {
    case SpatialShape::ball:
      return c * ic.radius * ic.radius * ic.radius;
    case SpatialShape::shell:
      return c * (ic.radius * ic.radius * ic.radius - ic.r_inner * ic.r_inner * ic.r_inner);
    case SpatialShape::box: {
      const Vec3 d = ic.box_max - ic.box_min;
      return d.x * d.y * d.z;
    }
  }
  return 0.0;
}

double mean_spacing(const InitialCondition& ic) {
  if (ic.M == 0) throw DomainError("mean_spacing: empty ensemble");
  return std::cbrt(support_volume(ic) / static_cast<double>(ic.M));
}

}  // namespace vpc
