#include "nastab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nastab/certify.hpp"
#include "nastab/integrate.hpp"
#include "nastab/report.hpp"
#include "nastab/stability.hpp"
#include "nastab/systems.hpp"

namespace nastab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Raised for flag combinations CLI11 cannot express.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config_path;
  std::string builtin_name;
  std::vector<std::string> params;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool json = false;
  std::string report_path;
};

struct Loaded {
  LoadedConfig cfg;
  std::string source;
  json params = json::object();
};

Loaded load(const Globals& g) {
  if (g.config_path.empty() == g.builtin_name.empty()) {
    throw UsageError("exactly one of --config and --builtin is required");
  }
  Loaded l;
  if (!g.config_path.empty()) {
    if (!g.params.empty()) throw UsageError("--param applies to --builtin only");
    l.cfg = load_config_file(g.config_path);
    l.source = g.config_path;
    return l;
  }
  BuiltinParams bp;
  for (const auto& kv : g.params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("--param expects key=value, got '" + kv + "'");
    }
    bp[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  for (const auto& [k, v] : bp) l.params[k] = v;
  l.cfg = builtin(g.builtin_name, bp);
  l.source = "builtin:" + g.builtin_name;
  return l;
}

std::vector<double> parse_list(const std::string& s, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": not a number list: '" + s + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + " is empty");
  return out;
}

int exit_code_for(const std::vector<VerdictStatus>& statuses) {
  bool inconclusive = false;
  for (auto s : statuses) {
    if (s == VerdictStatus::kFail) return kExitFail;
    if (s == VerdictStatus::kInconclusive) inconclusive = true;
  }
  return inconclusive ? kExitInconclusive : kExitPass;
}

const char* overall_status(int code) {
  switch (code) {
    case kExitPass: return "pass";
    case kExitFail: return "fail";
    default: return "inconclusive";
  }
}

std::string theorem_name(CertificateMode mode) {
  switch (mode) {
    case CertificateMode::kUniform:
      return "uniform stability theorem for (V, W*) pairs: "
             "V1(x) <= V(t,x) <= V2(x), dV/dt - max{W*,0} <= 0, "
             "integral max{W*,0} dt <= M(x0)";
    case CertificateMode::kUniformAsymptotic:
      return "uniform asymptotic stability theorem for (V, W*) pairs: "
             "V1(x) <= V(t,x) <= V2(x), dV/dt - max{W*,0} <= -V3(x), "
             "integral max{W*,0} dt <= M(x0)";
    case CertificateMode::kGlobal:
      return "global uniform asymptotic stability theorem for (V, W*) pairs: "
             "the asymptotic conditions on all of R^n with V1 radially unbounded";
  }
  return {};
}

constexpr const char* kMatrosovTheorem =
    "Matrosov-type conditions: V' <= V*(x) <= 0, W bounded, "
    "|W'| >= xi near E = {V* = 0} on alpha < |x| < A, "
    "then the constructed (V, W*) pair under the uniform asymptotic theorem";

// Writes the JSON report to the requested destinations. Duration is the
// only field allowed to differ between identical runs.
void emit(const Globals& g, RunManifest manifest,
          std::chrono::steady_clock::time_point start, json body,
          std::ostream& out, const std::string& extra_path = {}) {
  manifest.duration_s = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  body["manifest"] = to_json(manifest);
  const std::string text = body.dump(2) + "\n";
  if (g.json) out << text;
  for (const auto& path : {g.report_path, extra_path}) {
    if (path.empty()) continue;
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write report to " + path);
    f << text;
  }
}

json base_knobs(const Globals& g, const Loaded& l) {
  return {{"seed", g.seed}, {"threads", g.threads}, {"params", l.params}};
}

// ---------------------------------------------------------------------------
// check

struct CheckArgs {
  std::string mode;
  std::size_t samples = 100'000;
  double horizon = 50.0;
  double T_check = 100.0;
  double init_radius = 0.0;
  std::size_t init_count = 16;
  std::string init_t0s = "0,1,5";
  double tol = 1e-10;
};

struct CheckOutcome {
  std::vector<Verdict> verdicts;
  std::optional<BudgetResult> budget;
  std::vector<VerdictStatus> statuses;
};

CheckOutcome run_checks(const Certificate& cert, const SystemDef& sys,
                        const SamplingPlan& plan,
                        const std::vector<InitialCondition>& init,
                        const BudgetOptions& bopts) {
  CheckOutcome o;
  o.verdicts.push_back(check_sandwich(cert, sys, plan));
  o.verdicts.push_back(check_decay(cert, sys, plan));
  if (cert.mode == CertificateMode::kGlobal) {
    o.verdicts.push_back(check_radially_unbounded(cert, sys));
  }
  o.budget = check_integral_budget(cert, sys, init, bopts);
  o.verdicts.push_back(o.budget->verdict);
  for (const auto& v : o.verdicts) o.statuses.push_back(v.status);
  return o;
}

json certificate_json(const Certificate& c) {
  return {{"V", c.V.to_string()},
          {"Wstar", c.Wstar.description()},
          {"V1", c.V1.to_string()},
          {"V2", c.V2.to_string()},
          {"V3", c.V3 ? json(c.V3->description()) : json(nullptr)},
          {"M", c.M.to_string()},
          {"mode", to_string(c.mode)}};
}

int cmd_check(const Globals& g, const CheckArgs& a, std::ostream& out,
              std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Loaded l = load(g);
  if (!l.cfg.certificate) throw ConfigError("config has no [certificate] section");
  Certificate cert = *l.cfg.certificate;
  if (!a.mode.empty()) cert.mode = parse_mode(a.mode);
  const SystemDef& sys = l.cfg.system;

  SamplingPlan plan{.samples = a.samples, .T_check = a.T_check,
                    .seed = g.seed, .threads = g.threads};
  const double radius = a.init_radius > 0 ? a.init_radius : 0.25 * sys.domain_radius;
  if (radius >= sys.domain_radius) {
    throw UsageError("--init-radius must be below the domain radius");
  }
  const auto t0s = parse_list(a.init_t0s, "--init-t0");
  auto init = sample_initial_conditions(sys.n, radius, t0s, a.init_count, g.seed);
  BudgetOptions bopts;
  bopts.T_max = a.horizon;
  bopts.integrate.abs_tol = a.tol;
  bopts.integrate.rel_tol = a.tol;
  bopts.threads = g.threads;

  CheckOutcome o = run_checks(cert, sys, plan, init, bopts);
  const int code = exit_code_for(o.statuses);

  std::ostream& human = g.json ? err : out;
  human << "Checking the " << theorem_name(cert.mode) << "\n";
  human << "  system: " << (sys.label.empty() ? l.source : sys.label)
        << " (n = " << sys.n << ", domain radius " << sys.domain_radius << ")\n";
  for (const auto& v : o.verdicts) print_verdict(v, human);
  human << "result: " << overall_status(code) << "\n";

  json checks = json::array();
  for (const auto& v : o.verdicts) checks.push_back(to_json(v));
  json knobs = base_knobs(g, l);
  knobs.update({{"mode", to_string(cert.mode)}, {"samples", a.samples},
                {"horizon", a.horizon}, {"T_check", a.T_check},
                {"init_radius", radius}, {"init_count", a.init_count},
                {"init_t0", t0s}, {"tol", a.tol}});
  json body = {{"theorem", theorem_name(cert.mode)},
               {"system", sys.label},
               {"certificate", certificate_json(cert)},
               {"checks", checks},
               {"budget", to_json(*o.budget)},
               {"status", overall_status(code)},
               {"exit_code", code}};
  emit(g, {"check", l.source, knobs}, start, std::move(body), out);
  return code;
}

// ---------------------------------------------------------------------------
// matrosov

struct MatrosovArgs {
  std::optional<double> alpha, A, r1;
  double horizon = 40.0;
  std::size_t samples = 100'000;
  double T_check = 100.0;
  double xi_scale = 1.0;
  std::vector<std::string> x0s;
  std::string t0s = "0,1,5";
  std::size_t directions = 8;
  double tol = 1e-10;
};

int cmd_matrosov(const Globals& g, const MatrosovArgs& a, std::ostream& out,
              std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Loaded l = load(g);
  if (!l.cfg.matrosov) throw ConfigError("config has no [matrosov] section");
  if (!l.cfg.certificate) throw ConfigError("config has no [certificate] section");
  MatrosovData md = *l.cfg.matrosov;
  if (a.alpha) md.alpha = *a.alpha;
  if (a.A) md.A = *a.A;
  if (a.r1) md.r1 = *a.r1;
  const SystemDef& sys = l.cfg.system;
  validate_matrosov(md, sys);
  if (!(a.xi_scale > 0)) throw UsageError("--xi-scale must be positive");

  std::ostream& human = g.json ? err : out;
  human << "Checking the " << kMatrosovTheorem << "\n";
  human << "  system: " << (sys.label.empty() ? l.source : sys.label) << "\n";

  SamplingPlan plan{.samples = a.samples, .T_check = a.T_check,
                    .seed = g.seed, .threads = g.threads};
  json knobs = base_knobs(g, l);
  knobs.update({{"alpha", md.alpha}, {"A", md.A}, {"r1", md.r1},
                {"zero_tol", md.zero_tol}, {"horizon", a.horizon},
                {"samples", a.samples}, {"T_check", a.T_check},
                {"xi_scale", a.xi_scale}, {"x0", a.x0s},
                {"t0", a.t0s}, {"directions", a.directions}, {"tol", a.tol}});
  json body = {{"theorem", kMatrosovTheorem}, {"system", sys.label}};

  DefinitenessEstimate est = matrosov_definiteness(md, sys, plan);
  body["definiteness"] = to_json(est);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "  [%s] |dW/dt| >= xi on the probe set: xi_hat = %.6g "
                "(%zu probes), L_hat = %.6g\n",
                to_string(est.status), est.xi_hat, est.probe_samples, est.L_hat);
  human << buf;
  if (!est.notes.empty()) human << "      note: " << est.notes << "\n";
  if (est.status != VerdictStatus::kPass) {
    const int code = est.status == VerdictStatus::kFail ? kExitFail : kExitInconclusive;
    human << "result: " << overall_status(code) << "\n";
    body["status"] = overall_status(code);
    body["exit_code"] = code;
    emit(g, {"matrosov", l.source, knobs}, start, std::move(body), out);
    return code;
  }

  const double xi = md.xi.value_or(est.xi_hat) * a.xi_scale;
  const double L_region = md.L.value_or(est.L_hat);
  body["xi_used"] = xi;
  body["L_region"] = L_region;

  // Trajectory bundle: explicit --x0 states or sphere directions just
  // inside |x| = A, started at every t0.
  std::vector<std::vector<double>> states;
  for (const auto& s : a.x0s) {
    auto x = parse_list(s, "--x0");
    if (static_cast<int>(x.size()) != sys.n) {
      throw UsageError("--x0 needs " + std::to_string(sys.n) + " components");
    }
    states.push_back(std::move(x));
  }
  if (states.empty()) {
    for (auto d : sphere_directions(sys.n, a.directions, g.seed)) {
      for (double& v : d) v *= md.A * (1.0 - 1e-6);
      states.push_back(std::move(d));
    }
  }
  std::vector<InitialCondition> init;
  for (double t0 : parse_list(a.t0s, "--t0")) {
    for (const auto& x : states) init.push_back({t0, x});
  }
  IntegrateOptions iopts;
  iopts.abs_tol = a.tol;
  iopts.rel_tol = a.tol;
  std::vector<Trajectory> bundle(init.size());
  parallel_for(init.size(), g.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      bundle[i] = integrate(sys, init[i].x0, init[i].t0, init[i].t0 + a.horizon, iopts);
    }
  });

  ZeroSetDistance dist(md, sys, md.A, g.seed);
  DwellResult dwell = dwell_bound_check(md, sys, l.cfg.certificate->V, bundle,
                                        xi, L_region, dist);
  body["dwell"] = to_json(dwell);
  std::size_t n_max = 0;
  double L_max = L_region;
  double longest = 0.0;
  for (const auto& t : dwell.trajectories) {
    n_max = std::max(n_max, t.N);
    L_max = std::max(L_max, t.L);
    longest = std::max(longest, t.max_dwell);
  }
  std::snprintf(buf, sizeof buf,
                "  dwell statistics: N_max = %zu over horizon %g, longest dwell "
                "%.6g, bound 2L/xi = %.6g\n",
                n_max, a.horizon, longest, 2.0 * L_max / xi);
  human << buf;
  print_verdict(dwell.verdict, human);

  const Expression budget =
      Expression::constant(2.0 * L_max * static_cast<double>(n_max + 1));
  Certificate cert = matrosov_construct(md, sys, *l.cfg.certificate, xi, budget,
                                        a.T_check);
  body["constructed_certificate"] = certificate_json(cert);
  human << "Checking the constructed pair under the "
        << theorem_name(cert.mode) << "\n";
  BudgetOptions bopts;
  bopts.T_max = a.horizon;
  bopts.integrate = iopts;
  bopts.threads = g.threads;
  CheckOutcome o = run_checks(cert, sys, plan, init, bopts);
  for (const auto& v : o.verdicts) print_verdict(v, human);

  std::vector<VerdictStatus> statuses = o.statuses;
  statuses.push_back(est.status);
  statuses.push_back(dwell.verdict.status);
  const int code = exit_code_for(statuses);
  human << "result: " << overall_status(code) << "\n";

  json checks = json::array();
  for (const auto& v : o.verdicts) checks.push_back(to_json(v));
  body["checks"] = checks;
  body["budget"] = to_json(*o.budget);
  body["N_max"] = n_max;
  body["status"] = overall_status(code);
  body["exit_code"] = code;
  emit(g, {"matrosov", l.source, knobs}, start, std::move(body), out);
  return code;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string x0;
  double t0 = 0.0;
  double tf = 10.0;
  double tol = 1e-10;
  double dt = 0.0;
  std::string out_path;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a, std::ostream& out,
                 std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Loaded l = load(g);
  const SystemDef& sys = l.cfg.system;
  const auto x0 = parse_list(a.x0, "--x0");
  if (static_cast<int>(x0.size()) != sys.n) {
    throw UsageError("--x0 needs " + std::to_string(sys.n) + " components");
  }
  if (!(a.tf > a.t0)) throw UsageError("--tf must exceed --t0");
  IntegrateOptions iopts;
  iopts.abs_tol = a.tol;
  iopts.rel_tol = a.tol;
  Trajectory traj = integrate(sys, x0, a.t0, a.tf, iopts);
  const double dt = a.dt > 0 ? a.dt : (a.tf - a.t0) / 100.0;
  const auto grid = uniform_grid(a.t0, traj.tf(), dt);

  if (a.out_path.empty() || a.out_path == "-") {
    write_csv(traj, grid, out);
  } else {
    std::ofstream f(a.out_path);
    if (!f) throw UsageError("cannot write " + a.out_path);
    write_csv(traj, grid, f);
  }
  if (traj.status() != TrajectoryStatus::kCompleted) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "trajectory %s at t = %.9g\n",
                  to_string(traj.status()), traj.tf());
    err << buf;
  }
  if (!g.report_path.empty()) {
    json knobs = base_knobs(g, l);
    knobs.update({{"x0", x0}, {"t0", a.t0}, {"tf", a.tf}, {"tol", a.tol}, {"dt", dt}});
    const auto& st = traj.stats();
    json body = {{"status", to_string(traj.status())},
                 {"t_end", traj.tf()},
                 {"accepted_steps", st.accepted},
                 {"rejected_steps", st.rejected},
                 {"rhs_evaluations", st.rhs_evaluations}};
    Globals quiet = g;
    quiet.json = false;
    emit(quiet, {"simulate", l.source, knobs}, start, std::move(body), out);
  }
  return kExitPass;
}

// ---------------------------------------------------------------------------
// delta

struct DeltaArgs {
  std::string eps_grid = "0.1,0.5,1";
  std::string t0_grid = "0,1,5,10";
  std::string out_dir = ".";
  double horizon = 50.0;
  std::size_t directions = 0;
  bool full_ball = false;
  double tol = 1e-10;
  std::optional<double> eta;
  std::optional<double> c;
};

int cmd_delta(const Globals& g, const DeltaArgs& a, std::ostream& out,
              std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Loaded l = load(g);
  const SystemDef& sys = l.cfg.system;
  const auto eps = parse_list(a.eps_grid, "--eps-grid");
  const auto t0s = parse_list(a.t0_grid, "--t0-grid");
  if (a.eta.has_value() != a.c.has_value()) {
    throw UsageError("--eta and --c must be given together");
  }
  StabilityOptions sopts;
  sopts.horizon = a.horizon;
  sopts.directions = a.directions;
  sopts.full_ball = a.full_ball;
  sopts.integrate.abs_tol = a.tol;
  sopts.integrate.rel_tol = a.tol;
  sopts.threads = g.threads;
  sopts.seed = g.seed;
  StabilityReport rep = uniformity_report(sys, eps, t0s, sopts);
  std::optional<SettlingTable> settle;
  if (a.eta) settle = settling_time(sys, *a.eta, *a.c, t0s, sopts);

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  {
    std::ofstream f(dir / "delta_table.csv");
    if (!f) throw UsageError("cannot write into " + a.out_dir);
    write_delta_csv(rep, f);
  }
  {
    std::ofstream f(dir / "delta_plot.dat");
    write_delta_plot(rep, f);
  }
  if (settle) {
    std::ofstream f(dir / "settling_table.csv");
    write_settling_csv(*settle, f);
  }

  const int code = rep.uniformly_stable ? kExitPass : kExitFail;
  std::ostream& human = g.json ? err : out;
  human << "Probing uniform stability (delta may not depend on t0) for "
        << (sys.label.empty() ? l.source : sys.label) << "\n";
  char buf[160];
  for (std::size_t i = 0; i < eps.size(); ++i) {
    std::snprintf(buf, sizeof buf,
                  "  epsilon = %-8g uniform delta = %.6g  spread over t0 = %.3g\n",
                  eps[i], rep.uniform_delta[i], rep.spread[i]);
    human << buf;
  }
  if (settle) {
    for (const auto& r : settle->rows) {
      if (r.T) {
        std::snprintf(buf, sizeof buf, "  settling eta = %g, c = %g, t0 = %g: T = %.6g\n",
                      settle->eta, settle->c, r.t0, *r.T);
      } else {
        std::snprintf(buf, sizeof buf,
                      "  settling eta = %g, c = %g, t0 = %g: not attained\n",
                      settle->eta, settle->c, r.t0);
      }
      human << buf;
    }
  }
  if (!rep.notes.empty()) human << "  note: " << rep.notes << "\n";
  human << "files: " << (dir / "delta_table.csv").string() << ", "
        << (dir / "delta_plot.dat").string()
        << (settle ? ", " + (dir / "settling_table.csv").string() : "") << ", "
        << (dir / "delta_summary.json").string() << "\n";
  human << "result: " << (code == kExitPass ? "uniformly stable (empirical)"
                                            : "delta vanishes for some epsilon")
        << "\n";

  json knobs = base_knobs(g, l);
  knobs.update({{"eps_grid", eps}, {"t0_grid", t0s}, {"horizon", a.horizon},
                {"directions", rep.directions}, {"full_ball", a.full_ball},
                {"tol", a.tol},
                {"bisection_rel_tol", sopts.bisection_rel_tol}});
  if (a.eta) knobs.update({{"eta", *a.eta}, {"c", *a.c}});
  json body = {{"theorem", "uniform stability: delta(epsilon) independent of t0"},
               {"system", sys.label},
               {"stability", to_json(rep)},
               {"settling", settle ? to_json(*settle) : json(nullptr)},
               {"status", overall_status(code)},
               {"exit_code", code}};
  emit(g, {"delta", l.source, knobs}, start, std::move(body), out,
       (dir / "delta_summary.json").string());
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Sampling-based checks of generalized Lyapunov certificates "
               "for non-autonomous ODEs",
               "nastab"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "TOML-style system/certificate file");
  app.add_option("--builtin", g.builtin_name, "Built-in system name")
      ->check(CLI::IsMember(builtin_names()));
  app.add_option("--param", g.params, "Built-in parameter key=value (repeatable)");
  app.add_option("--seed", g.seed, "Seed for all sampling")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--json", g.json, "Print the JSON report on stdout");
  app.add_option("--report", g.report_path, "Also write the JSON report here");

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "Check the (V, W*) certificate conditions");
  check->add_option("--mode", ca.mode, "uniform | asymptotic | global")
      ->check(CLI::IsMember({"uniform", "asymptotic", "uniform-asymptotic", "global"}));
  check->add_option("--samples", ca.samples, "Sampled (t, x) points")->capture_default_str();
  check->add_option("--horizon", ca.horizon, "Budget integration horizon")->capture_default_str();
  check->add_option("--t-check", ca.T_check, "Sampled times lie in [0, T]")->capture_default_str();
  check->add_option("--init-radius", ca.init_radius, "Radius of the initial-state ball");
  check->add_option("--init-count", ca.init_count, "Initial states per t0")->capture_default_str();
  check->add_option("--init-t0", ca.init_t0s, "Initial times, comma separated")->capture_default_str();
  check->add_option("--tol", ca.tol, "Integrator tolerance")->capture_default_str();

  MatrosovArgs ma;
  auto* mat = app.add_subcommand("matrosov", "Matrosov-type conditions and construction");
  mat->add_option("--alpha", ma.alpha, "Inner radius of the probe annulus");
  mat->add_option("--A", ma.A, "Outer radius of the probe annulus");
  mat->add_option("--r1", ma.r1, "Distance to E defining the probe set");
  mat->add_option("--horizon", ma.horizon, "Trajectory horizon")->capture_default_str();
  mat->add_option("--samples", ma.samples, "Probe candidates")->capture_default_str();
  mat->add_option("--t-check", ma.T_check, "Probe times lie in [0, T]")->capture_default_str();
  mat->add_option("--xi-scale", ma.xi_scale, "Multiply xi before the dwell check")
      ->capture_default_str();
  mat->add_option("--x0", ma.x0s, "Bundle initial state (repeatable)");
  mat->add_option("--t0", ma.t0s, "Bundle initial times")->capture_default_str();
  mat->add_option("--directions", ma.directions, "Bundle size without --x0")
      ->capture_default_str();
  mat->add_option("--tol", ma.tol, "Integrator tolerance")->capture_default_str();

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Integrate one trajectory to CSV");
  sim->add_option("--x0", sa.x0, "Initial state, comma separated")->required();
  sim->add_option("--t0", sa.t0, "Initial time")->capture_default_str();
  sim->add_option("--tf", sa.tf, "Final time")->capture_default_str();
  sim->add_option("--tol", sa.tol, "Integrator tolerance")->capture_default_str();
  sim->add_option("--dt", sa.dt, "Output spacing (default (tf - t0)/100)");
  sim->add_option("--out", sa.out_path, "CSV file (default stdout)");

  DeltaArgs da;
  auto* delta = app.add_subcommand("delta", "Empirical epsilon-delta table across t0");
  delta->add_option("--eps-grid", da.eps_grid, "Epsilon values")->capture_default_str();
  delta->add_option("--t0-grid", da.t0_grid, "Initial times")->capture_default_str();
  delta->add_option("--out", da.out_dir, "Output directory")->capture_default_str();
  delta->add_option("--horizon", da.horizon, "Trajectory horizon")->capture_default_str();
  delta->add_option("--directions", da.directions, "Sphere directions (0 = default)");
  delta->add_flag("--full-ball", da.full_ball, "Also probe interior starting states");
  delta->add_option("--tol", da.tol, "Integrator tolerance")->capture_default_str();
  delta->add_option("--eta", da.eta, "Settling threshold");
  delta->add_option("--c", da.c, "Settling initial radius");

  std::vector<const char*> argv{"nastab"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (check->parsed()) return cmd_check(g, ca, out, err);
    if (mat->parsed()) return cmd_matrosov(g, ma, out, err);
    if (sim->parsed()) return cmd_simulate(g, sa, out, err);
    if (delta->parsed()) return cmd_delta(g, da, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error at offset " << e.offset() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace nastab
