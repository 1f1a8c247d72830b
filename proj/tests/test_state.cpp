#include <doctest.h>

#include <cmath>
#include <limits>

#include "support.hpp"
#include "vpc/errors.hpp"
#include "vpc/state.hpp"

using namespace vpc;

TEST_SUITE("phase-state") {
  TEST_CASE("min_charge_distance on hand cases") {
    SimState s;
    s.ensemble = PlasmaEnsemble({{{1, 0, 0}, {}, 1.0}});
    s.charges = {{{0, 0, 0}, {}}};
    CHECK(min_charge_distance(s) == 1.0);

    s.ensemble = PlasmaEnsemble({{{2, 0, 0}, {}, 0.5}, {{0, 3, 0}, {}, 0.5}});
    CHECK(min_charge_distance(s) == 2.0);
  }

  TEST_CASE("min_charge_distance matches a double loop") {
    testing::Gen g(11);
    for (int trial = 0; trial < 20; ++trial) {
      SimState s;
      s.ensemble = g.ensemble(1000, 2.0, 1.0);
      s.charges = g.charges(3, 2.0, 0.0);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : s.charges) {
        for (const auto& p : s.ensemble.particles()) {
          const Vec3 d = p.position - c.position;
          best = std::min(best, std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z));
        }
      }
      CHECK(min_charge_distance(s) == doctest::Approx(best).epsilon(1e-15));
    }
  }

  TEST_CASE("min_charge_separation") {
    SimState s;
    s.charges = {{{0, 0, 0}, {}}, {{1, 0, 0}, {}}};
    CHECK(min_charge_separation(s) == 1.0);

    s.charges = {{{0, 0, 0}, {}}, {{1, 0, 0}, {}}, {{0.5, std::sqrt(3.0) / 2, 0}, {}}};
    CHECK(min_charge_separation(s) == doctest::Approx(1.0).epsilon(1e-15));

    testing::Gen g(5);
    s.charges = g.charges(5, 1.0, 0.0);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < 5; ++a)
      for (std::size_t b = 0; b < 5; ++b)
        if (a != b) best = std::min(best, norm(s.charges[a].position - s.charges[b].position));
    CHECK(min_charge_separation(s) == best);
  }

  TEST_CASE("max_speed") {
    SimState s;
    s.ensemble = PlasmaEnsemble({{{0, 0, 0}, {3, 4, 0}, 1.0}});
    CHECK(max_speed(s) == 5.0);
    s.ensemble = PlasmaEnsemble({{{0, 0, 0}, {}, 0.5}, {{1, 0, 0}, {}, 0.5}});
    CHECK(max_speed(s) == 0.0);

    testing::Gen g(3);
    s.ensemble = g.ensemble(500, 1.0, 2.0);
    double best = 0.0;
    for (const auto& p : s.ensemble.particles()) best = std::max(best, norm(p.velocity));
    CHECK(max_speed(s) == best);
  }

  TEST_CASE("errors") {
    SimState s;
    CHECK_THROWS_AS(min_charge_distance(s), DomainError);
    CHECK_THROWS_AS(max_speed(s), DomainError);
    s.charges = {{{0, 0, 0}, {}}};
    CHECK_THROWS_AS(min_charge_separation(s), DomainError);

    CHECK_THROWS_AS(PlasmaEnsemble({{{0, 0, 0}, {}, -1.0}}), DomainError);
    CHECK_THROWS_AS(PlasmaEnsemble({{{std::nan(""), 0, 0}, {}, 1.0}}), DomainError);
    CHECK_THROWS_AS(PlasmaEnsemble({{{0, 0, 0}, {std::numeric_limits<double>::infinity(), 0, 0}, 1.0}}),
                    DomainError);

    s.ensemble = PlasmaEnsemble({{{0, 0, 0}, {}, 1.0}});
    CHECK_THROWS_AS(validate(s), DomainError);
    s.ensemble = PlasmaEnsemble({{{1, 0, 0}, {}, 1.0}});
    CHECK_NOTHROW(validate(s));
  }

  TEST_CASE("N = 0 is accepted") {
    SimState s;
    s.ensemble = PlasmaEnsemble({{{0, 0, 0}, {1, 0, 0}, 1.0}});
    CHECK_NOTHROW(validate(s));
    CHECK(max_speed(s) == 1.0);
  }

  TEST_CASE("total weight is the sum of weights and set_phase keeps weights") {
    testing::Gen g(8);
    auto e = g.ensemble(100, 1.0, 1.0, false);
    double sum = 0.0;
    for (const auto& p : e.particles()) sum += p.weight;
    CHECK(e.total_weight() == sum);
    const double w7 = e[7].weight;
    e.set_phase(7, {9, 9, 9}, {1, 1, 1});
    CHECK(e[7].weight == w7);
    CHECK(e[7].position == Vec3{9, 9, 9});
    CHECK(e.total_weight() == sum);
  }
}
