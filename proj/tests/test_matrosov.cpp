#include <doctest.h>

#include <cmath>

#include "nastab/certify.hpp"
#include "oracles.hpp"

using namespace nastab;

namespace {

struct Fixture {
  LoadedConfig cfg = builtin("matrosov_oscillator");
  const SystemDef& sys = cfg.system;
  const MatrosovData& md = *cfg.matrosov;
  SamplingPlan plan;
  Fixture() { plan.samples = 100'000; }

  std::vector<Trajectory> bundle(double horizon = 40.0) const {
    std::vector<Trajectory> out;
    for (double t0 : {0.0, 1.0, 5.0}) {
      for (auto d : sphere_directions(2, 8)) {
        for (double& v : d) v *= md.A * (1 - 1e-6);
        out.push_back(integrate(sys, d, t0, t0 + horizon));
      }
    }
    return out;
  }
};

}  // namespace

TEST_CASE("definiteness estimate agrees with the dense grid oracle") {
  Fixture f;
  const double oracle_xi = oracle::matrosov_xi_grid(0.5, 1.0, 0.01, 100.0);
  CHECK(oracle_xi >= 0.2);
  CHECK(oracle_xi <= 0.25);
  auto est = matrosov_definiteness(f.md, f.sys, f.plan);
  CHECK(est.status == VerdictStatus::kPass);
  CHECK(est.xi_hat >= 0.2);
  CHECK(est.xi_hat <= 0.25);
  // both are minima over finite point sets, so both sit above the infimum;
  // they must agree to within the grid resolution
  CHECK(std::fabs(est.xi_hat - oracle_xi) <= 0.02 * oracle_xi);
  CHECK(est.probe_samples > 100);
  CHECK(est.L_hat > 0.0);
  CHECK(est.L_hat <= 0.01 + 1e-12);  // |x1 x2| with |x2| < r1 and |x1| < A
}

TEST_CASE("definiteness fails for a constant W and rejects bad annuli") {
  auto cfg = load_config_file(NASTAB_CONFIG_DIR "/constant_w.toml");
  SamplingPlan plan;
  plan.samples = 20000;
  auto est = matrosov_definiteness(*cfg.matrosov, cfg.system, plan);
  CHECK(est.status == VerdictStatus::kFail);
  CHECK(est.xi_hat <= 1e-12);

  MatrosovData md = *cfg.matrosov;
  md.alpha = 1.0;
  md.A = 0.5;
  CHECK_THROWS_AS(matrosov_definiteness(md, cfg.system, plan), std::invalid_argument);
}

TEST_CASE("zero-set distance: closed form and sampled cloud agree") {
  Fixture f;
  ZeroSetDistance exact(f.md, f.sys, 1.0);
  CHECK(exact.exact());
  MatrosovData md = f.md;
  md.E_distance.reset();
  ZeroSetDistance cloud(md, f.sys, 1.0);
  CHECK_FALSE(cloud.exact());
  CHECK(cloud.cloud_size() > 100);
  for (std::vector<double> x : {std::vector<double>{0.3, 0.005}, {-0.7, -0.02}, {0.9, 0.3}}) {
    CHECK(exact(x) == doctest::Approx(std::fabs(x[1])));
    CHECK(cloud(x) == doctest::Approx(std::fabs(x[1])).epsilon(1e-3));
  }
}

TEST_CASE("dwell bounds hold and break when xi is inflated") {
  Fixture f;
  auto est = matrosov_definiteness(f.md, f.sys, f.plan);
  ZeroSetDistance dist(f.md, f.sys, f.md.A);
  const auto trajs = f.bundle();
  auto ok = dwell_bound_check(f.md, f.sys, f.cfg.certificate->V, trajs, est.xi_hat,
                              est.L_hat, dist);
  CHECK(ok.verdict.status == VerdictStatus::kPass);
  std::size_t dwells = 0;
  for (const auto& t : ok.trajectories) {
    CHECK(t.status == VerdictStatus::kPass);
    for (const auto& d : t.dwells) CHECK(d.length() <= t.dwell_bound + 2e-9);
    CHECK(t.integral_total <= t.integral_bound + 1e-9);
    dwells += t.N;
  }
  CHECK(dwells > 0);

  auto bad = dwell_bound_check(f.md, f.sys, f.cfg.certificate->V, trajs,
                               10.0 * est.xi_hat, est.L_hat, dist);
  CHECK(bad.verdict.status == VerdictStatus::kFail);
  REQUIRE(bad.verdict.witness);
  CHECK(bad.verdict.witness->inequality.find("2L/xi") != std::string::npos);
  CHECK_THROWS_AS(dwell_bound_check(f.md, f.sys, f.cfg.certificate->V, trajs, 0.0,
                                    est.L_hat, dist),
                  std::invalid_argument);
}

TEST_CASE("constructed certificate vanishes at the origin and passes the checks") {
  Fixture f;
  auto est = matrosov_definiteness(f.md, f.sys, f.plan);
  auto cert = matrosov_construct(f.md, f.sys, *f.cfg.certificate, est.xi_hat,
                                 Expression::constant(1.0));
  CHECK(cert.mode == CertificateMode::kUniformAsymptotic);
  const std::vector<double> zero{0.0, 0.0};
  for (double t = 0; t <= 100; t += 0.37) {
    CHECK(cert.Wstar(t, zero) == 0.0);
    CHECK(cert.V3.value()(t, zero) == 0.0);
  }
  // on E the strict rate is half the definiteness bound
  const std::vector<double> on_e{0.8, 0.0};
  CHECK(cert.V3.value()(0.0, on_e) > 0.0);
  CHECK(cert.V3.value()(0.0, on_e) <= 0.5 * est.xi_hat + 1e-15);

  SamplingPlan p;
  p.samples = 20000;
  CHECK(check_sandwich(cert, f.sys, p).status == VerdictStatus::kPass);
  CHECK(check_decay(cert, f.sys, p).status == VerdictStatus::kPass);
}

TEST_CASE("derivative along solutions") {
  Fixture f;
  const std::vector<double> x{0.4, -0.2};
  const double t = 0.9;
  const double expect = x[1] * x[1] - x[0] * x[0] - (2 + std::sin(t)) * x[0] * x[1];
  CHECK(derivative_along(f.md.W, f.sys, t, x) == doctest::Approx(expect));
}
