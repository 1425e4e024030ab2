#include <doctest.h>

#include <cmath>

#include "nastab/stability.hpp"
#include "oracles.hpp"

using namespace nastab;

TEST_CASE("delta for linear decay equals epsilon at every t0") {
  auto cfg = builtin("linear_decay");
  auto rep = uniformity_report(cfg.system, {0.1, 0.5, 1.0}, {0.0, 1.0, 5.0, 10.0});
  CHECK(rep.uniformly_stable);
  CHECK(rep.delta_nondecreasing);
  for (std::size_t i = 0; i < rep.epsilons.size(); ++i) {
    for (const auto& d : rep.delta[i]) {
      CHECK(std::fabs(d.delta - d.epsilon) <= 1e-3 * d.epsilon);
    }
    CHECK(rep.spread[i] <= 1e-3);
  }
  CHECK(rep.directions == 2);
}

TEST_CASE("delta for exponential growth matches the closed form") {
  auto cfg = builtin("example17", {{"h", "0"}});
  for (double t0 : {0.0, 1.0, 5.0}) {
    auto d = estimate_delta(cfg.system, 0.5, t0);
    const double exact = oracle::delta_exp_growth(0.5, t0);
    // bisection keeps the last passing radius, which lies within the
    // relative tolerance below the exact threshold
    CHECK(d.delta <= exact * (1 + 1e-6));
    CHECK(d.delta >= exact * (1 - 1.1e-3));
    CHECK(d.witness_direction.size() == 2);
  }
}

TEST_CASE("property: example17 trajectories respect |x| <= |x0| e^M1") {
  auto cfg = builtin("example17");
  for (double t0 : {0.0, 1.0, 5.0}) {
    for (auto d : sphere_directions(2, 41)) {
      for (double r : {0.05, 0.5, 1.0}) {
        std::vector<double> x0{r * d[0], r * d[1]};
        auto tr = integrate(cfg.system, x0, t0, t0 + 50);
        CHECK(tr.max_norm(16) / r <= std::exp(1.0) * (1 + 1e-6));
      }
    }
  }
}

TEST_CASE("property: doubling the directions barely moves delta") {
  for (const char* name : {"linear_decay", "example17", "matrosov_oscillator"}) {
    CAPTURE(name);
    auto cfg = builtin(name);
    StabilityOptions a, b;
    a.horizon = b.horizon = 20;
    b.directions = 2 * default_direction_count(cfg.system.n);
    for (double t0 : {0.0, 3.0}) {
      const double da = estimate_delta(cfg.system, 0.5, t0, a).delta;
      const double db = estimate_delta(cfg.system, 0.5, t0, b).delta;
      CHECK(std::fabs(da - db) <= 0.01 * da);
    }
  }
}

TEST_CASE("unstable system has zero delta") {
  auto cfg = builtin("unstable_linear");
  auto rep = uniformity_report(cfg.system, {0.1, 1.0}, {0.0, 5.0});
  CHECK_FALSE(rep.uniformly_stable);
  for (const auto& row : rep.delta) {
    for (const auto& d : row) CHECK(d.delta == 0.0);
  }
}

TEST_CASE("full-ball mode agrees with sphere directions") {
  auto cfg = builtin("example17");
  StabilityOptions a, b;
  b.full_ball = true;
  const double da = estimate_delta(cfg.system, 0.5, 0.0, a).delta;
  const double db = estimate_delta(cfg.system, 0.5, 0.0, b).delta;
  CHECK(db <= da);
  CHECK(db >= 0.99 * da);
}

TEST_CASE("epsilon outside the domain is rejected") {
  auto cfg = builtin("linear_decay");
  CHECK_THROWS_AS(estimate_delta(cfg.system, 5.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_delta(cfg.system, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("settling time for linear decay is ln(c / eta)") {
  auto cfg = builtin("linear_decay");
  auto tab = settling_time(cfg.system, 0.1, 1.0, {0.0, 2.0, 7.0});
  REQUIRE(tab.uniform_T);
  for (const auto& row : tab.rows) {
    REQUIRE(row.T);
    CHECK(std::fabs(*row.T - std::log(10.0)) <= 1e-6);
  }
  CHECK(tab.spread <= 1e-6);
}

TEST_CASE("example17 never settles") {
  auto cfg = builtin("example17");
  auto tab = settling_time(cfg.system, 0.05, 0.5, {0.0, 1.0, 5.0});
  CHECK_FALSE(tab.uniform_T);
  for (const auto& row : tab.rows) CHECK_FALSE(row.T);
}

TEST_CASE("example17 bounds check") {
  Example17Params p;
  p.beta = parse("exp(-t)", 1);
  p.h = parse("x1^2", 1);
  std::vector<InitialCondition> init{{0.0, {0.3, 0.4}}, {1.0, {-0.2, 0.1}}, {5.0, {0.0, 0.5}}};
  auto r = example17_bounds_check(p, init, 50.0);
  CHECK(r.verdict.status == VerdictStatus::kPass);
  CHECK(r.M1 == doctest::Approx(1.0).epsilon(1e-10));
  for (const auto& e : r.entries) {
    CHECK(e.sup_norm_sq <= e.bound_norm_sq);
    CHECK(e.integral + e.tail <= e.budget);
    CHECK(e.max_residual <= 1e-9);
    CHECK(e.quad_error <= 1e-6);
  }
  CHECK(r.entries[0].budget == doctest::Approx(0.25 * std::exp(2.0)));
}
