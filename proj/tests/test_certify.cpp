#include <doctest.h>

#include <cmath>

#include "nastab/certify.hpp"
#include "oracles.hpp"

using namespace nastab;

namespace {

SamplingPlan plan(std::size_t samples, std::uint64_t seed = 0) {
  SamplingPlan p;
  p.samples = samples;
  p.seed = seed;
  return p;
}

// dV/dt - max{W*,0} re-evaluated independently of the checker.
double decay_lhs(const Certificate& c, const SystemDef& s, double t,
                 const std::vector<double>& x) {
  const double h = 1e-7;
  std::vector<double> xp(x), xm(x);
  const auto f = s.rhs(t, x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] += h * f[i];
    xm[i] -= h * f[i];
  }
  const double vdot = (c.V.evaluate(t + h, xp) - c.V.evaluate(t - h, xm)) / (2 * h);
  return vdot - std::max(c.Wstar(t, x), 0.0);
}

}  // namespace

TEST_CASE("violation rule tolerates rounding only") {
  CHECK_FALSE(violates(1.0, 1.0));
  CHECK_FALSE(violates(1.0 + 1e-13, 1.0));
  CHECK(violates(1.0 + 1e-9, 1.0));
  CHECK(violates(1e-11, 0.0));
  CHECK_FALSE(violates(-5.0, 0.0));
}

TEST_CASE("linear decay passes every check in asymptotic mode") {
  auto cfg = builtin("linear_decay");
  const auto& c = *cfg.certificate;
  auto s = check_sandwich(c, cfg.system, plan(20000));
  CHECK(s.status == VerdictStatus::kPass);
  CHECK(s.samples == 20000);
  auto d = check_decay(c, cfg.system, plan(20000));
  CHECK(d.status == VerdictStatus::kPass);
  // V' = -x^2 = -V3 exactly
  CHECK(std::fabs(d.margin_min) <= 1e-12);
  CHECK(std::fabs(d.margin_max) <= 1e-12);
  const double t0s[] = {0.0, 2.0};
  auto init = sample_initial_conditions(1, 0.5, t0s, 4, 0);
  CHECK(init.size() == 8);
  auto b = check_integral_budget(c, cfg.system, init);
  CHECK(b.verdict.status == VerdictStatus::kPass);
}

TEST_CASE("unstable linear fails with a sound witness") {
  auto cfg = builtin("unstable_linear");
  const auto& c = *cfg.certificate;
  auto d = check_decay(c, cfg.system, plan(5000));
  REQUIRE(d.status == VerdictStatus::kFail);
  REQUIRE(d.witness);
  const auto& w = *d.witness;
  CHECK(w.lhs > w.rhs);
  CHECK(decay_lhs(c, cfg.system, w.t, w.x) >= 1e-6);
  CHECK(w.inequality.find("dV/dt") != std::string::npos);
  CHECK(d.margin_min < 0);
}

TEST_CASE("property: fail witnesses re-evaluate to violations") {
  // x1 grows whenever sin(t) > 1/2, so |x|^2 is not a Lyapunov function.
  auto cfg = load_config(R"toml(
[system]
n = 2
domain_radius = 1
f = ["-x1 + 2 * sin(t) * x1", "-x2"]
[certificate]
V = "x1^2 + x2^2"
V1 = "0.5 * (x1^2 + x2^2)"
V2 = "2 * (x1^2 + x2^2)"
)toml");
  const auto& c = *cfg.certificate;
  for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
    auto d = check_decay(c, cfg.system, plan(3000, seed));
    REQUIRE(d.status == VerdictStatus::kFail);
    const auto& w = *d.witness;
    CHECK(decay_lhs(c, cfg.system, w.t, w.x) > 1e-12);
  }
}

TEST_CASE("property: more samples never turn a fail into a pass") {
  // Violation only in a thin shell near the boundary in a short time window.
  auto cfg = load_config(R"toml(
[system]
n = 2
domain_radius = 1
f = ["-x1 + 500 * max(x1^2 + x2^2 - 0.9, 0) * max(sin(t) - 0.9, 0) * x1", "-x2"]
[certificate]
V = "0.5 * (x1^2 + x2^2)"
V1 = "0.5 * (x1^2 + x2^2)"
V2 = "0.5 * (x1^2 + x2^2)"
)toml");
  const auto& c = *cfg.certificate;
  bool failed = false;
  for (std::size_t n : {100, 1000, 10000, 100000}) {
    auto d = check_decay(c, cfg.system, plan(n));
    if (failed) CHECK(d.status == VerdictStatus::kFail);
    failed = failed || d.status == VerdictStatus::kFail;
  }
  CHECK(failed);
}

TEST_CASE("property: asymptotic pass implies uniform pass") {
  for (const char* name : {"linear_decay"}) {
    auto cfg = builtin(name);
    Certificate c = *cfg.certificate;
    c.mode = CertificateMode::kUniformAsymptotic;
    REQUIRE(check_decay(c, cfg.system, plan(5000)).status == VerdictStatus::kPass);
    c.mode = CertificateMode::kUniform;
    CHECK(check_decay(c, cfg.system, plan(5000)).status == VerdictStatus::kPass);
  }
  auto cfg = load_config_file(NASTAB_CONFIG_DIR "/linear_pair.toml");
  Certificate c = *cfg.certificate;
  REQUIRE(check_decay(c, cfg.system, plan(5000)).status == VerdictStatus::kPass);
  c.mode = CertificateMode::kUniform;
  CHECK(check_decay(c, cfg.system, plan(5000)).status == VerdictStatus::kPass);
  CHECK(check_sandwich(c, cfg.system, plan(5000)).status == VerdictStatus::kPass);
}

TEST_CASE("missing V3 in a strict mode is a contract error") {
  auto cfg = builtin("unstable_linear");
  Certificate c = *cfg.certificate;
  c.mode = CertificateMode::kUniformAsymptotic;
  CHECK_THROWS_AS(check_decay(c, cfg.system, plan(10)), std::invalid_argument);
}

TEST_CASE("sandwich failures") {
  auto cfg = builtin("linear_decay");
  Certificate c = *cfg.certificate;
  c.V = parse("0.5 * x1^2 * (1 + 0.5 * sin(t))", 1);
  auto v = check_sandwich(c, cfg.system, plan(2000));
  CHECK(v.status == VerdictStatus::kFail);
  REQUIRE(v.witness);
  CHECK(v.witness->lhs > v.witness->rhs);
  c = *cfg.certificate;
  c.V1 = parse("x1^2 - 0.25", 1);
  CHECK(check_sandwich(c, cfg.system, plan(2000)).status == VerdictStatus::kFail);
}

TEST_CASE("radial unboundedness") {
  auto cfg = builtin("linear_decay");
  Certificate c = *cfg.certificate;
  CHECK(check_radially_unbounded(c, cfg.system).status == VerdictStatus::kPass);
  c.V1 = parse("x1^2 / (1 + x1^2)", 1);
  CHECK(check_radially_unbounded(c, cfg.system).status == VerdictStatus::kFail);
}

TEST_CASE("example17 budget against the closed form, and a wrong budget") {
  auto cfg = builtin("example17", {{"h", "0"}});
  const auto& c = *cfg.certificate;
  std::vector<InitialCondition> init{{0.0, {1.0, 0.0}}, {0.0, {0.3, 0.4}}, {2.0, {0.0, 0.5}}};
  auto r = check_integral_budget(c, cfg.system, init);
  CHECK(r.verdict.status == VerdictStatus::kPass);
  REQUIRE(r.entries.size() == 3);
  for (const auto& e : r.entries) {
    const double nsq = e.ic.x0[0] * e.ic.x0[0] + e.ic.x0[1] * e.ic.x0[1];
    REQUIRE(e.tail.has_value());
    CHECK(e.used + *e.tail >= oracle::budget_used(nsq, e.ic.t0) - 1e-9);
    CHECK(e.used == doctest::Approx(oracle::budget_used(nsq, e.ic.t0)).epsilon(1e-8));
    CHECK(e.budget == doctest::Approx(nsq * std::exp(2.0)));
  }
  CHECK(r.entries[1].budget == doctest::Approx(0.25 * std::exp(2.0)));

  Certificate wrong = c;
  wrong.M = parse("(x1^2 + x2^2) / 10", 2);
  auto bad = check_integral_budget(wrong, cfg.system, {{0.0, {1.0, 0.0}}});
  CHECK(bad.verdict.status == VerdictStatus::kFail);
  REQUIRE(bad.verdict.witness);
  CHECK(bad.verdict.witness->lhs > bad.verdict.witness->rhs);
}

TEST_CASE("budget entries that leave the domain are inconclusive") {
  auto cfg = builtin("unstable_linear");
  auto r = check_integral_budget(*cfg.certificate, cfg.system, {{0.0, {0.5}}});
  CHECK(r.verdict.status == VerdictStatus::kInconclusive);
  CHECK(r.entries[0].trajectory == TrajectoryStatus::kLeftDomain);
}

TEST_CASE("sampling is deterministic and seed dependent") {
  auto cfg = builtin("example17");
  const auto& c = *cfg.certificate;
  auto a = check_decay(c, cfg.system, plan(3000, 4));
  auto b = check_decay(c, cfg.system, plan(3000, 4));
  CHECK(a.margin_min == b.margin_min);
  CHECK(a.margin_mean == b.margin_mean);
  SamplingPlan threaded = plan(3000, 4);
  threaded.threads = 3;
  auto t = check_decay(c, cfg.system, threaded);
  CHECK(t.margin_mean == a.margin_mean);
  auto other = check_decay(c, cfg.system, plan(3000, 5));
  CHECK(other.margin_mean != a.margin_mean);
}
