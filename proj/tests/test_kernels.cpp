#include <doctest.h>

#include <cmath>
#include <cstring>

#include "support.hpp"
#include "vpc/errors.hpp"
#include "vpc/kernels.hpp"

using namespace vpc;

namespace {

bool bit_equal(const Vec3& a, const Vec3& b) { return std::memcmp(&a, &b, sizeof(Vec3)) == 0; }

KernelSpec eps(double e, double ep = 0.0) {
  KernelSpec s;
  s.epsilon_charge = e;
  s.epsilon_plasma = ep;
  return s;
}

}  // namespace

TEST_SUITE("interaction-kernels") {
  TEST_CASE("coulomb values") {
    CHECK(coulomb_force({1, 0, 0}) == Vec3{1, 0, 0});
    CHECK(coulomb_force({2, 0, 0}) == Vec3{0.25, 0, 0});
    CHECK(coulomb_force({0, 0, 0.5}) == Vec3{0, 0, 4.0});
    CHECK(coulomb_potential({0, 2, 0}) == 0.5);
    CHECK_THROWS_AS(coulomb_force({0, 0, 0}), DomainError);
    CHECK_THROWS_AS(coulomb_potential({0, 0, 0}), DomainError);
  }

  TEST_CASE("regularized force on both branches") {
    const auto s = eps(0.1);
    CHECK(regularized_charge_force({1, 0, 0}, s) == Vec3{1, 0, 0});
    CHECK(regularized_charge_force({0.1, 0, 0}, s).x == doctest::Approx(100.0).epsilon(1e-14));
    // interior formula evaluated just inside the boundary
    const Vec3 inside{0.1 * (1 - 1e-12), 0, 0};
    CHECK(regularized_charge_force(inside, s).x == doctest::Approx(100.0).epsilon(1e-10));
    CHECK(regularized_charge_force({0.05, 0, 0}, s).x == doctest::Approx(50.0).epsilon(1e-14));
    CHECK(regularized_charge_force({0, 0, 0}, s) == Vec3{0, 0, 0});
  }

  TEST_CASE("regularized potential on both branches") {
    const auto s = eps(0.1);
    CHECK(regularized_charge_potential({1, 0, 0}, s) == 1.0);
    CHECK(regularized_charge_potential({0.1, 0, 0}, s) == doctest::Approx(10.0).epsilon(1e-14));
    const Vec3 inside{0.1 * (1 - 1e-12), 0, 0};
    CHECK(regularized_charge_potential(inside, s) == doctest::Approx(10.0).epsilon(1e-10));
    CHECK(regularized_charge_potential({0, 0, 0}, s) == doctest::Approx(15.0).epsilon(1e-14));
  }

  TEST_CASE("exact tail is bit-identical to coulomb") {
    testing::Gen g(1);
    for (int k = 0; k < 20000; ++k) {
      const double e = g.log_uniform(1e-4, 1.0);
      const Vec3 r = g.direction() * g.uniform(e, 10.0);
      if (norm(r) < e) continue;
      REQUIRE(bit_equal(regularized_charge_force(r, eps(e)), coulomb_force(r)));
    }
  }

  TEST_CASE("exact mode is the bare kernel") {
    KernelSpec s;
    s.mode = KernelMode::exact;
    CHECK(bit_equal(regularized_charge_force({0.001, 0, 0}, s), coulomb_force({0.001, 0, 0})));
    CHECK(regularized_charge_potential({0.001, 0, 0}, s) == coulomb_potential({0.001, 0, 0}));
    CHECK_THROWS_AS(regularized_charge_force({0, 0, 0}, s), DomainError);
  }

  TEST_CASE("force is minus the gradient of the potential") {
    testing::Gen g(2);
    const double h = 1e-6;
    for (int k = 0; k < 200; ++k) {
      const auto s = eps(g.uniform(0.05, 0.5));
      const Vec3 r = g.direction() * g.uniform(0.2, 2.0) * s.epsilon_charge;
      auto phi = [&](const Vec3& x) { return regularized_charge_potential(x, s); };
      const Vec3 grad{(phi(r + Vec3{h, 0, 0}) - phi(r - Vec3{h, 0, 0})) / (2 * h),
                      (phi(r + Vec3{0, h, 0}) - phi(r - Vec3{0, h, 0})) / (2 * h),
                      (phi(r + Vec3{0, 0, h}) - phi(r - Vec3{0, 0, h})) / (2 * h)};
      const Vec3 f = regularized_charge_force(r, s);
      // the kink of the second derivative at eps costs accuracy within h of it
      if (std::abs(norm(r) - s.epsilon_charge) < 10 * h) continue;
      CHECK(testing::rel_diff(-1.0 * grad, f) < 1e-6);
    }
  }

  TEST_CASE("plummer kernel") {
    CHECK(softened_plasma_force({1, 0, 0}, eps(0.1, 0.0)) == Vec3{1, 0, 0});
    CHECK(softened_plasma_force({0, 0, 0}, eps(0.1, 1.0)) == Vec3{0, 0, 0});
    CHECK(softened_plasma_force({1, 0, 0}, eps(0.1, 1.0)).x == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-15));
    CHECK(softened_plasma_potential({1, 0, 0}, eps(0.1, 1.0)) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(softened_plasma_force({0, 0, 0}, eps(0.1, 0.0)), DomainError);
    CHECK_THROWS_AS(softened_plasma_potential({0, 0, 0}, eps(0.1, 0.0)), DomainError);
  }

  TEST_CASE("kernels are odd") {
    testing::Gen g(4);
    for (int k = 0; k < 1000; ++k) {
      const Vec3 r = g.in_ball(1.0);
      const auto s = eps(0.3, 0.1);
      CHECK(regularized_charge_force(-1.0 * r, s) == -1.0 * regularized_charge_force(r, s));
      CHECK(softened_plasma_force(-1.0 * r, s) == -1.0 * softened_plasma_force(r, s));
    }
  }

  TEST_CASE("spec validation") {
    CHECK_NOTHROW(eps(0.05).validate());
    CHECK_THROWS_AS(eps(0.0).validate(), ConfigError);
    CHECK_THROWS_AS(eps(-1.0).validate(), ConfigError);
    CHECK_THROWS_AS(eps(0.1, -0.1).validate(), ConfigError);
    KernelSpec s = eps(0.0);
    s.mode = KernelMode::exact;
    CHECK_NOTHROW(s.validate());
  }
}
