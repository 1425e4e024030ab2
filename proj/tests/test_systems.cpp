#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "nastab/systems.hpp"

using namespace nastab;

namespace {

std::string error_of(const std::string& text) {
  try {
    load_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("config: minimal system with certificate") {
  auto cfg = load_config(R"toml(
[system]
n = 1   # scalar
f = ["-x1"]
domain_radius = 2

[certificate]
V = "0.5 * x1^2"
V1 = "0.5 * x1^2"
V2 = "x1^2"
V3 = "x1^2"
mode = "asymptotic"
)toml");
  CHECK(cfg.system.n == 1);
  CHECK(cfg.system.domain_radius == 2.0);
  REQUIRE(cfg.certificate);
  CHECK(cfg.certificate->mode == CertificateMode::kUniformAsymptotic);
  CHECK(cfg.certificate->M.evaluate(0, std::vector<double>{3}) == 0.0);
  CHECK(!cfg.matrosov);
}

TEST_CASE("config: semicolons separate pairs on one line") {
  auto cfg = load_config("[system] n = 1; f = [\"-x1\"]; domain_radius = 1.5");
  CHECK(cfg.system.domain_radius == 1.5);
}

TEST_CASE("config: errors name the problem") {
  CHECK(contains(error_of("[system]\nn = 1\nf = [\"-x1\"]\nspeed = 3\n"),
                 "line 4: unknown key 'speed'"));
  CHECK(contains(error_of("[systm]\nn = 1\n"), "unknown section"));
  CHECK(contains(error_of("[system]\nn = 2\nf = [\"-x1\"]\n"), "2"));
  CHECK(contains(error_of("[system]\nn = 1\nf = [\"x2\"]\n"), "x2"));
  CHECK(contains(error_of("[system]\nn = 1\nf = [\"1 - x1\"]\n"),
                 "origin is not an equilibrium"));
  CHECK(contains(error_of("[system]\nn = 1\nf = [\"-x1\"]\n[certificate]\n"
                          "V = \"x1^2\"\nV1 = \"x1^2\"\nV2 = \"(1 + t) * x1^2\"\n"),
                 "time-independent"));
  CHECK(contains(error_of("[system]\nn = 1\nf = [\"-x1\"]\n[certificate]\n"
                          "V = \"x1^2\"\nV1 = \"x1^2\"\nV2 = \"x1^2\"\n"
                          "Wstar = \"exp(-t)\"\n"),
                 "Wstar(t, 0) must vanish"));
  CHECK(contains(error_of("[system]\nn = 1\nf = [\"-x1\"]\n[certificate]\n"
                          "V = \"x1^2\"\nV1 = \"x1^2\"\nV2 = \"x1^2\"\n"
                          "mode = \"global\"\n"),
                 "requires V3"));
  CHECK(contains(error_of("[system]\nn = 1\nf = [\"-x1\"]\n[certificate]\n"
                          "V = \"x1^2\"\nV1 = \"x1^2\"\nV2 = \"x1^2\"\n"
                          "mode = \"sideways\"\n"),
                 "unknown certificate mode"));
  CHECK(contains(error_of("[system]\nn = 2\ndomain_radius = 2\nf = [\"x2\", \"-x1\"]\n"
                          "[certificate]\nV = \"x1^2\"\nV1 = \"x1^2\"\nV2 = \"x1^2\"\n"
                          "[matrosov]\nW = \"x1\"\nVstar = \"-(x2^2)\"\nalpha = 1\nA = 0.5\n"),
                 "0 < alpha < A"));
  CHECK(contains(error_of("[system]\nn = 1\nf = [\"-x1\" \n"), "line"));
  CHECK(contains(error_of("[system]\nn = 1\nn = 2\n"), "duplicate key"));
}

TEST_CASE("config: origin_is_equilibrium = false skips the equilibrium check") {
  auto cfg = load_config("[system]\nn = 1\nf = [\"1 - x1\"]\norigin_is_equilibrium = false\n");
  CHECK_FALSE(cfg.system.origin_is_equilibrium);
}

TEST_CASE("config: example17 section") {
  auto cfg = load_config("[system]\nn = 3\ndomain_radius = 4\n[example17]\nh = \"0\"\n");
  CHECK(cfg.system.n == 3);
  REQUIRE(cfg.certificate);
  CHECK(cfg.certificate->tail.has_value());
  CHECK(contains(error_of("[system]\nn = 1\nf = [\"-x1\"]\n[example17]\n"), "remove f"));
  CHECK(contains(error_of("[system]\nn = 1\n[example17]\nh = \"-1\"\n"), "nonnegative"));
  CHECK(contains(error_of("[system]\nn = 1\n[example17]\nbeta = \"-exp(-t)\"\n"),
                 "positive"));
}

TEST_CASE("builtins exist and reject unknown parameters") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    auto cfg = builtin(name);
    CHECK(cfg.system.label == name);
    CHECK(cfg.certificate.has_value());
  }
  CHECK_THROWS_AS(builtin("nope"), ConfigError);
  CHECK_THROWS_AS(builtin("linear_decay", {{"speed", "2"}}), ConfigError);
  CHECK_THROWS_AS(builtin("example17", {{"n", "two"}}), ConfigError);
  CHECK(builtin("example17", {{"n", "4"}}).system.n == 4);
}

TEST_CASE("example17 budget constant M1 is the integral of beta") {
  auto beta = parse("exp(-t)", 1);
  CHECK(integrate_beta(beta) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(integrate_beta(parse("1 / (1 + t)^2", 1)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("property: example17 W* equals dV/dt along solutions") {
  std::mt19937_64 rng(3);
  for (const char* h : {"x1^2", "0", "abs(x1)", "x1^4 + x1^2"}) {
    auto cfg = builtin("example17", {{"h", h}, {"n", "3"}});
    const auto& c = *cfg.certificate;
    std::uniform_real_distribution<double> ux(-1.0, 1.0), ut(0.0, 100.0);
    for (int k = 0; k < 2000; ++k) {
      std::vector<double> x{ux(rng), ux(rng), ux(rng)};
      const double t = ut(rng);
      const auto f = cfg.system.rhs(t, x);
      const double vdot = c.V.directional({t, x}, 1.0, f);
      CHECK(std::fabs(vdot - std::max(c.Wstar(t, x), 0.0)) <= 1e-9);
    }
  }
}

TEST_CASE("property: oscillator dW/dt reduces to -x1^2 on x2 = 0") {
  auto cfg = builtin("matrosov_oscillator");
  const auto& md = *cfg.matrosov;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-2.0, 2.0), ut(0.0, 100.0);
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> x{ux(rng), 0.0};
    const double t = ut(rng);
    const auto f = cfg.system.rhs(t, x);
    const double wdot = md.W.directional({t, x}, 1.0, f);
    CHECK(std::fabs(wdot + x[0] * x[0]) <= 1e-9);
    CHECK(md.Vstar.evaluate(t, x) == 0.0);
  }
}

TEST_CASE("ScalarField wraps expressions and callables") {
  ScalarField a(parse("t * x1", 1));
  CHECK(a.uses_time());
  CHECK(a(2.0, std::vector<double>{3.0}) == 6.0);
  ScalarField b([](double, std::span<const double> x) { return 2 * x[0]; }, "2 x1", false);
  CHECK(b(0.0, std::vector<double>{4.0}) == 8.0);
  CHECK(b.description() == "2 x1");
  CHECK(parse_mode("uniform-asymptotic") == CertificateMode::kUniformAsymptotic);
  CHECK(parse_mode("asymptotic") == CertificateMode::kUniformAsymptotic);
  CHECK(parse_mode("global") == CertificateMode::kGlobal);
}
