#include <doctest.h>

#include <cmath>
#include <limits>

#include "support.hpp"
#include "vpc/diagnostics.hpp"
#include "vpc/dynamics.hpp"
#include "vpc/errors.hpp"

using namespace vpc;

namespace {

SimState random_state(testing::Gen& g, std::size_t m, std::size_t n) {
  SimState s;
  s.charges = g.charges(n, 1.0, 0.2);
  std::vector<Macroparticle> ps;
  while (ps.size() < m) {
    const Vec3 x = g.in_ball(1.5);
    bool clear = true;
    for (const auto& c : s.charges) clear = clear && norm(x - c.position) > 0.2;
    if (clear) ps.push_back({x, g.in_ball(0.5), 1.0 / static_cast<double>(m)});
  }
  s.ensemble = PlasmaEnsemble(std::move(ps));
  return s;
}

class AlwaysPass final : public SubstepMonitor {
 public:
  std::string_view name() const override { return "always"; }
  MonitorResult check(const SubstepView& view) override {
    MonitorResult r;
    r.name = "always";
    r.window = view.window;
    return r.judge();
  }
};

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("integrator config validation") {
    IntegratorConfig c;
    CHECK_NOTHROW(c.validate());
    c.dt_max = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.cfl_charge = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.window_K2 = 8;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.output_stride = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("partition examples") {
    IntegratorConfig c;
    auto p = build_partition(1.0, 1.0, c);
    CHECK(p.delta_T == 1.0 / 16.0);
    CHECK(p.windows() == 16);
    CHECK(p.boundaries.back() == 1.0);

    p = build_partition(1.0, 1e-3, c);
    CHECK(p.windows() == 1);
    CHECK(p.boundaries == std::vector<double>{0.0, 1.0});

    p = build_partition(1.0, 1.0 / (16.0 * 0.3), c);
    REQUIRE(p.windows() == 4);
    const double expect[] = {0.0, 0.3, 0.6, 0.9, 1.0};
    for (int k = 0; k < 5; ++k) CHECK(p.boundaries[k] == doctest::Approx(expect[k]).epsilon(1e-14));

    CHECK_THROWS_AS(build_partition(0.0, 1.0, c), DomainError);
    CHECK_THROWS_AS(build_partition(1.0, 0.0, c), DomainError);
  }

  TEST_CASE("partition covers [0, T] with gaps at most delta_T") {
    testing::Gen g(41);
    IntegratorConfig c;
    for (int k = 0; k < 500; ++k) {
      c.window_K2 = g.uniform(16, 64);
      const double T = g.log_uniform(1e-3, 10);
      const double Q = g.log_uniform(0.01, 100);
      const auto p = build_partition(T, Q, c);
      REQUIRE(p.boundaries.front() == 0.0);
      REQUIRE(p.boundaries.back() == T);
      for (std::size_t i = 1; i < p.boundaries.size(); ++i) {
        REQUIRE(p.boundaries[i] > p.boundaries[i - 1]);
        // i delta_T carries a rounding error of a few ulp of T
        REQUIRE(p.boundaries[i] - p.boundaries[i - 1] <= p.delta_T + 4e-16 * T);
      }
    }
  }

  TEST_CASE("acceleration of one particle and one charge") {
    SimState s;
    s.ensemble = PlasmaEnsemble({{{1, 0, 0}, {}, 0.25}});
    s.charges = {{{0, 0, 0}, {}}};
    const auto a = acceleration(s, FieldSolverConfig{});
    CHECK(a.particles[0] == Vec3{1, 0, 0});
    CHECK(a.charges[0] == Vec3{-0.25, 0, 0});
  }

  TEST_CASE("two charges without plasma accelerate equal and opposite") {
    SimState s;
    s.charges = {{{0.3, 0.1, 0}, {}}, {{-0.7, 0.4, 0.2}, {}}};
    const auto a = acceleration(s, FieldSolverConfig{});
    CHECK(a.charges[0] == -1.0 * a.charges[1]);
    CHECK(a.charges[0] == coulomb_force(s.charges[0].position - s.charges[1].position));
  }

  TEST_CASE("acceleration matches a single-loop reference") {
    testing::Gen g(42);
    const auto s = random_state(g, 200, 3);
    FieldSolverConfig cfg;
    cfg.kernel.epsilon_charge = 0.3;  // some particles sit inside the core
    cfg.kernel.epsilon_plasma = 0.01;
    const auto a = acceleration(s, cfg);
    const double e = cfg.kernel.epsilon_charge;
    auto core = [e](const Vec3& r) {
      const double d = norm(r);
      return d >= e ? (1.0 / (d * d * d)) * r : (1.0 / (e * e * e)) * r;
    };
    for (std::size_t j = 0; j < s.ensemble.size(); ++j) {
      Vec3 ref;
      for (std::size_t k = 0; k < s.ensemble.size(); ++k) {
        if (k == j) continue;
        const Vec3 r = s.ensemble[j].position - s.ensemble[k].position;
        const double s2 = norm2(r) + 1e-4;
        ref += (s.ensemble[k].weight / (s2 * std::sqrt(s2))) * r;
      }
      for (const auto& c : s.charges) ref += core(s.ensemble[j].position - c.position);
      CHECK(testing::rel_diff(a.particles[j], ref) < 1e-12);
    }
    for (std::size_t al = 0; al < s.charges.size(); ++al) {
      Vec3 ref;
      for (const auto& p : s.ensemble.particles()) ref += p.weight * core(s.charges[al].position - p.position);
      for (std::size_t b = 0; b < s.charges.size(); ++b) {
        if (b == al) continue;
        const Vec3 r = s.charges[al].position - s.charges[b].position;
        ref += (1.0 / std::pow(norm(r), 3)) * r;
      }
      CHECK(testing::rel_diff(a.charges[al], ref) < 1e-12);
    }
  }

  TEST_CASE("free particle drifts") {
    SimState s;
    s.ensemble = PlasmaEnsemble({{{1, 2, 3}, {0.5, -1, 2}, 1.0}});
    const auto next = step(s, 0.1, FieldSolverConfig{});
    CHECK(next.ensemble[0].position == Vec3{1, 2, 3} + 0.1 * Vec3{0.5, -1, 2});
    CHECK(next.ensemble[0].velocity == Vec3{0.5, -1, 2});
    CHECK(next.time == 0.1);
    CHECK_THROWS_AS(step(s, 0.0, FieldSolverConfig{}), DomainError);
  }

  TEST_CASE("constant field step is the exact parabola") {
    testing::Gen g(43);
    for (int k = 0; k < 100; ++k) {
      const Vec3 a = g.in_ball(2.0), x = g.in_ball(1.0), v = g.in_ball(1.0);
      const double dt = g.uniform(1e-3, 0.5);
      const auto out = verlet_step({x, v}, dt, [a](const Vec3&) { return a; });
      CHECK(testing::rel_diff(out.position, x + dt * v + (0.5 * dt * dt) * a) < 1e-14);
      CHECK(testing::rel_diff(out.velocity, v + dt * a) < 1e-14);
    }
  }

  TEST_CASE("time reversibility") {
    testing::Gen g(44);
    FieldSolverConfig cfg;
    cfg.kernel.epsilon_plasma = 0.05;
    for (int trial = 0; trial < 5; ++trial) {
      const auto s0 = random_state(g, 60, 2);
      auto s1 = step(s0, 1e-3, cfg);
      auto flip = [](SimState s) {
        for (std::size_t j = 0; j < s.ensemble.size(); ++j) {
          s.ensemble.set_phase(j, s.ensemble[j].position, -1.0 * s.ensemble[j].velocity);
        }
        for (auto& c : s.charges) c.velocity = -1.0 * c.velocity;
        return s;
      };
      const auto back = flip(step(flip(s1), 1e-3, cfg));
      for (std::size_t j = 0; j < s0.ensemble.size(); ++j) {
        CHECK(testing::rel_diff(back.ensemble[j].position, s0.ensemble[j].position) < 1e-9);
        CHECK(norm(back.ensemble[j].velocity - s0.ensemble[j].velocity) < 1e-9 * (1 + norm(s0.ensemble[j].velocity)));
      }
      for (std::size_t a = 0; a < s0.charges.size(); ++a) {
        CHECK(testing::rel_diff(back.charges[a].position, s0.charges[a].position) < 1e-9);
      }
    }
  }

  TEST_CASE("weights never change") {
    testing::Gen g(45);
    auto s = random_state(g, 50, 1);
    std::vector<double> w;
    for (const auto& p : s.ensemble.particles()) w.push_back(p.weight);
    Propagator prop(s, FieldSolverConfig{});
    for (int k = 0; k < 20; ++k) prop.advance(1e-3);
    for (std::size_t j = 0; j < w.size(); ++j) CHECK(prop.state().ensemble[j].weight == w[j]);
  }

  TEST_CASE("non-finite coordinates raise an integration error and keep the state") {
    SimState s;
    s.ensemble = PlasmaEnsemble({{{0, 0, 0}, {}, 0.5}, {{1, 0, 0}, {1e300, 0, 0}, 0.5}});
    Propagator prop(s, FieldSolverConfig{});
    try {
      prop.advance(1e10);
      FAIL("expected an integration error");
    } catch (const IntegrationError& e) {
      CHECK(e.body() == IntegrationError::Body::particle);
      CHECK(e.index() == 1);
    }
    CHECK(prop.state() == s);
  }

  TEST_CASE("adaptive dt terms") {
    IntegratorConfig c;
    KernelSpec k;
    SimState s;
    s.ensemble = PlasmaEnsemble({{{100, 0, 0}, {1e-6, 0, 0}, 0.5}, {{101, 0, 0}, {}, 0.5}});
    s.charges = {{{0, 0, 0}, {}}};
    CHECK(adaptive_dt(s, c, k) == c.dt_max);

    k.epsilon_charge = 0.01;
    c.cfl_charge = 0.05;
    s.ensemble = PlasmaEnsemble({{{0.005, 0, 0}, {}, 1.0}});
    CHECK(charge_bound_term(s, c, k) == doctest::Approx(5e-5).epsilon(1e-12));
    CHECK(adaptive_dt(s, c, k) == doctest::Approx(5e-5).epsilon(1e-12));

    testing::Gen g(46);
    auto e = g.ensemble(100, 1.0, 1.0);
    SimState fast;
    fast.ensemble = e;
    std::vector<Macroparticle> doubled(e.particles().begin(), e.particles().end());
    for (auto& p : doubled) p.velocity = 2.0 * p.velocity;
    SimState faster;
    faster.ensemble = PlasmaEnsemble(doubled);
    CHECK(speed_bound_term(faster, c) == doctest::Approx(0.5 * speed_bound_term(fast, c)).epsilon(1e-14));

    c.adaptive = false;
    CHECK(adaptive_dt(s, c, k) == c.dt_max);
  }

  TEST_CASE("run_window with t_end at the current time is the identity") {
    testing::Gen g(47);
    const auto s = random_state(g, 20, 1);
    AlwaysPass m;
    SubstepMonitor* ms[] = {&m};
    auto [out, rec] = run_window(s, s.time, IntegratorConfig{}, FieldSolverConfig{}, ms);
    CHECK(out == s);
    CHECK(rec.records.empty());
    CHECK(rec.substeps == 0);
  }

  TEST_CASE("run_window bookkeeping") {
    testing::Gen g(48);
    const auto s = random_state(g, 30, 1);
    AlwaysPass m;
    SubstepMonitor* ms[] = {&m};
    IntegratorConfig ic;
    ic.dt_max = 3e-3;
    WindowOptions opt;
    opt.K1 = 2.0;
    double q_seen = compute_Q(s, opt.K1, KernelSpec{});
    opt.after_substep = [&](const Propagator& p, std::size_t) {
      q_seen = std::max(q_seen, compute_Q(p.state(), opt.K1, p.config().kernel));
    };
    Propagator prop(s, FieldSolverConfig{});
    const auto out = run_window(prop, 0.1, ic, ms, opt);
    CHECK(prop.state().time == 0.1);
    CHECK(out.records.size() == out.substeps);
    CHECK(out.substeps >= 34);
    CHECK(out.q_window == q_seen);
    CHECK(out.max_dt <= ic.dt_max);
  }
}
