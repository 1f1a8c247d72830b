#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "vpc/diagnostics.hpp"
#include "vpc/errors.hpp"
#include "vpc/sampling.hpp"

using namespace vpc;

namespace {

InitialCondition ball_with_charge() {
  InitialCondition ic;
  ic.M = 1000;
  ic.radius = 2.0;
  ic.vacuum_radius = 0.5;
  ic.charges = {{{0, 0, 0}, {}}};
  return ic;
}

}  // namespace

TEST_SUITE("sampling") {
  TEST_CASE("vacuum island and total weight") {
    const auto ic = ball_with_charge();
    const auto s = sample(ic);
    REQUIRE(s.ensemble.size() == 1000);
    for (const auto& p : s.ensemble.particles()) {
      CHECK(norm(p.position) >= 0.5);
      CHECK(norm(p.position) <= 2.0);
      CHECK(norm(p.velocity) <= ic.v_max);
      CHECK(p.weight == 1e-3);
    }
    CHECK(s.ensemble.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.charges == ic.charges);
  }

  TEST_CASE("same seed, same ensemble; other seed, other ensemble") {
    auto ic = ball_with_charge();
    CHECK(sample(ic) == sample(ic));
    auto other = ic;
    other.seed = 2;
    CHECK_FALSE(sample(ic) == sample(other));
  }

  TEST_CASE("every shape respects its support and the islands") {
    testing::Gen g(61);
    for (int trial = 0; trial < 30; ++trial) {
      InitialCondition ic;
      ic.spatial = static_cast<SpatialShape>(trial % 3);
      ic.velocity = static_cast<VelocityShape>((trial / 3) % 2);
      ic.radius = g.uniform(1.0, 3.0);
      ic.r_inner = g.uniform(0.1, 0.8) * ic.radius;
      ic.box_min = {-1, -2, -0.5};
      ic.box_max = {1, 1, 0.5};
      ic.v_max = g.uniform(0.5, 3.0);
      ic.sigma = g.uniform(0.2, 2.0);
      ic.M = 300;
      ic.vacuum_radius = 0.3;
      ic.charges = g.charges(2, 0.5, 0.1);
      ic.seed = trial;
      ic.validate(KernelSpec{});
      const auto s = sample(ic);
      for (const auto& p : s.ensemble.particles()) {
        for (const auto& c : ic.charges) REQUIRE(norm(p.position - c.position) >= ic.vacuum_radius);
        REQUIRE(norm(p.velocity) <= ic.v_max);
        const double r = norm(p.position - ic.center);
        if (ic.spatial == SpatialShape::ball) REQUIRE(r <= ic.radius);
        if (ic.spatial == SpatialShape::shell) {
          REQUIRE(r <= ic.radius);
          REQUIRE(r >= ic.r_inner);
        }
        if (ic.spatial == SpatialShape::box) {
          REQUIRE(p.position.x >= -1);
          REQUIRE(p.position.y <= 1);
          REQUIRE(p.position.z <= 0.5);
        }
      }
      CHECK(s.ensemble.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("uniform ball mean position within the CLT bound") {
    InitialCondition ic;
    ic.M = 20000;
    ic.radius = 1.0;
    ic.vacuum_radius = 0.3;
    ic.seed = 99;
    const auto s = sample(ic);
    Vec3 mean;
    for (const auto& p : s.ensemble.particles()) mean += p.weight * p.position;
    // each coordinate of a uniform unit ball has variance 1/5
    const double sigma = std::sqrt(0.2 / static_cast<double>(ic.M));
    CHECK(std::abs(mean.x) < 3 * sigma);
    CHECK(std::abs(mean.y) < 3 * sigma);
    CHECK(std::abs(mean.z) < 3 * sigma);
  }

  TEST_CASE("Maxwellian velocity variance") {
    InitialCondition ic;
    ic.M = 20000;
    ic.velocity = VelocityShape::truncated_maxwellian;
    ic.sigma = 0.7;
    ic.v_max = 100.0;  // truncation never active
    const auto s = sample(ic);
    double vx2 = 0.0;
    for (const auto& p : s.ensemble.particles()) vx2 += p.weight * p.velocity.x * p.velocity.x;
    // sample variance of a normal: relative standard error sqrt(2 / M)
    CHECK(std::abs(vx2 / 0.49 - 1.0) < 3 * std::sqrt(2.0 / ic.M));
  }

  TEST_CASE("islands swallowing the support are a configuration error") {
    InitialCondition ic;
    ic.radius = 1.0;
    ic.vacuum_radius = 1.5;
    ic.charges = {{{0, 0, 0}, {}}};
    CHECK_THROWS_AS(sample(ic), ConfigError);
  }

  TEST_CASE("validation") {
    KernelSpec k;
    auto ic = ball_with_charge();
    CHECK_NOTHROW(ic.validate(k));
    ic.vacuum_radius = k.epsilon_charge;
    CHECK_THROWS_AS(ic.validate(k), ConfigError);
    ic = ball_with_charge();
    ic.charges.push_back(ic.charges.front());
    CHECK_THROWS_AS(ic.validate(k), ConfigError);
    ic = ball_with_charge();
    ic.spatial = SpatialShape::shell;
    ic.r_inner = 3.0;
    CHECK_THROWS_AS(ic.validate(k), ConfigError);
    ic = ball_with_charge();
    ic.spatial = SpatialShape::box;
    ic.box_min = {0, 0, 0};
    ic.box_max = {1, 0, 1};
    CHECK_THROWS_AS(ic.validate(k), ConfigError);
  }

  TEST_CASE("M = 0 gives an empty ensemble") {
    InitialCondition ic;
    ic.M = 0;
    ic.charges = {{{0, 0, 0}, {}}};
    const auto s = sample(ic);
    CHECK(s.ensemble.empty());
    CHECK(s.charges.size() == 1);
  }

  TEST_CASE("initial Q") {
    SimState s;
    s.ensemble = PlasmaEnsemble({{{1, 0, 0}, {}, 0.5}, {{0, 0, 2}, {}, 0.5}});
    s.charges = {{{0, 0, 0}, {}}};
    CHECK(initial_Q(s, 1.0, KernelSpec{}) == std::sqrt(2.0));

    s.ensemble = PlasmaEnsemble({{{1e9, 0, 0}, {}, 1.0}});
    CHECK(initial_Q(s, 4.0, KernelSpec{}) == doctest::Approx(2.0).epsilon(1e-9));

    auto ic = ball_with_charge();
    const auto st = sample(ic);
    CHECK(initial_Q(st, 3.0, KernelSpec{}) == compute_Q(st, 3.0, KernelSpec{}));
  }

  TEST_CASE("mean spacing") {
    InitialCondition ic;
    ic.spatial = SpatialShape::box;
    ic.box_min = {0, 0, 0};
    ic.box_max = {2, 2, 2};
    ic.M = 1000;
    CHECK(support_volume(ic) == 8.0);
    CHECK(mean_spacing(ic) == doctest::Approx(0.2).epsilon(1e-14));
  }
}
