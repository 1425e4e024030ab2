#include "nastab/systems.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "nastab/quadrature.hpp"

namespace nastab {

void SystemDef::rhs(double t, std::span<const double> x,
                    std::span<double> out) const {
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].evaluate(t, x);
}

std::vector<double> SystemDef::rhs(double t, std::span<const double> x) const {
  std::vector<double> out(f.size());
  rhs(t, x, out);
  return out;
}

ScalarField::ScalarField(Expression e)
    : expr_(std::move(e)),
      description_(expr_->to_string()),
      time_dependent_(expr_->uses_time()) {}

ScalarField::ScalarField(
    std::function<double(double, std::span<const double>)> fn,
    std::string description, bool time_dependent)
    : fn_(std::move(fn)),
      description_(std::move(description)),
      time_dependent_(time_dependent) {}

double ScalarField::operator()(double t, std::span<const double> x) const {
  if (expr_) return expr_->evaluate(t, x);
  if (fn_) return fn_(t, x);
  return 0.0;
}

std::string to_string(CertificateMode mode) {
  switch (mode) {
    case CertificateMode::kUniform: return "uniform";
    case CertificateMode::kUniformAsymptotic: return "uniform-asymptotic";
    case CertificateMode::kGlobal: return "global";
  }
  return "uniform";
}

CertificateMode parse_mode(const std::string& s) {
  if (s == "uniform") return CertificateMode::kUniform;
  if (s == "uniform-asymptotic" || s == "asymptotic") {
    return CertificateMode::kUniformAsymptotic;
  }
  if (s == "global") return CertificateMode::kGlobal;
  throw ConfigError("unknown certificate mode '" + s + "'");
}

namespace {

constexpr double kZeroTol = 1e-10;
constexpr int kTimeSamples = 101;
constexpr double kTimeSpan = 100.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double sample_time(int k) { return kTimeSpan * k / (kTimeSamples - 1); }

void require_time_free(const Expression& e, const std::string& name) {
  if (e.uses_time()) {
    throw ConfigError(name +
                      ": comparison functions must be time-independent");
  }
}

void require_dimension(const Expression& e, int n, const std::string& name) {
  if (e.max_variable() > n) {
    throw ConfigError(name + " references x" +
                      std::to_string(e.max_variable()) + " but n = " +
                      std::to_string(n));
  }
}

double param_double(const BuiltinParams& p, const std::string& key,
                    double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("builtin parameter " + key + " is not a number: " +
                      it->second);
  }
}

std::string param_text(const BuiltinParams& p, const std::string& key,
                       const std::string& fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void reject_unknown(const BuiltinParams& p,
                    std::initializer_list<const char*> known,
                    const std::string& name) {
  for (const auto& [key, value] : p) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) {
      throw ConfigError("builtin " + name + " has no parameter '" + key + "'");
    }
  }
}

Expression sum_of_squares(int n) {
  Expression s = Expression::binary(BinaryOp::kPow, Expression::variable(1),
                                    Expression::constant(2));
  for (int i = 2; i <= n; ++i) {
    s = s + Expression::binary(BinaryOp::kPow, Expression::variable(i),
                               Expression::constant(2));
  }
  return s;
}

LoadedConfig simple_scalar(const std::string& label, const std::string& rhs,
                           bool with_v3, CertificateMode mode,
                           double domain_radius) {
  LoadedConfig c;
  c.system.n = 1;
  c.system.f = {parse(rhs, 1)};
  c.system.domain_radius = domain_radius;
  c.system.label = label;
  Certificate cert;
  cert.V = parse("0.5*x1^2", 1);
  cert.Wstar = ScalarField(parse("0", 1));
  cert.V1 = cert.V;
  cert.V2 = cert.V;
  if (with_v3) cert.V3 = ScalarField(parse("x1^2", 1));
  cert.M = parse("0", 1);
  cert.mode = mode;
  c.certificate = std::move(cert);
  return c;
}

}  // namespace

void validate_system(const SystemDef& sys) {
  if (sys.n < 1) throw ConfigError("system dimension n must be >= 1");
  if (static_cast<int>(sys.f.size()) != sys.n) {
    throw ConfigError("system has " + std::to_string(sys.f.size()) +
                      " right-hand sides for n = " + std::to_string(sys.n));
  }
  if (!(sys.domain_radius > 0.0) || !std::isfinite(sys.domain_radius)) {
    throw ConfigError("domain_radius must be positive and finite");
  }
  for (std::size_t i = 0; i < sys.f.size(); ++i) {
    require_dimension(sys.f[i], sys.n, "f[" + std::to_string(i) + "]");
  }
  if (!sys.origin_is_equilibrium) return;
  const std::vector<double> zero(static_cast<std::size_t>(sys.n), 0.0);
  for (int k = 0; k < kTimeSamples; ++k) {
    const double t = sample_time(k);
    const auto fx = sys.rhs(t, zero);
    double norm2 = 0.0;
    for (double v : fx) norm2 += v * v;
    if (!(std::sqrt(norm2) <= kZeroTol)) {
      throw ConfigError("origin is not an equilibrium: |f(t,0)| = " +
                        fmt(std::sqrt(norm2)) + " at t = " + fmt(t));
    }
  }
}

void validate_certificate(const Certificate& cert, const SystemDef& sys) {
  require_dimension(cert.V, sys.n, "V");
  require_dimension(cert.V1, sys.n, "V1");
  require_dimension(cert.V2, sys.n, "V2");
  require_dimension(cert.M, sys.n, "M");
  require_time_free(cert.V1, "V1");
  require_time_free(cert.V2, "V2");
  if (cert.V3) {
    if (cert.V3->expression()) require_dimension(*cert.V3->expression(), sys.n, "V3");
    if (cert.V3->uses_time()) {
      throw ConfigError("V3: comparison functions must be time-independent");
    }
  }
  if (cert.Wstar.expression()) {
    require_dimension(*cert.Wstar.expression(), sys.n, "Wstar");
  }
  if (cert.M.uses_time()) throw ConfigError("M is a function of x0 only");
  if (cert.mode != CertificateMode::kUniform && !cert.V3) {
    throw ConfigError("mode " + to_string(cert.mode) + " requires V3");
  }
  const std::vector<double> zero(static_cast<std::size_t>(sys.n), 0.0);
  for (int k = 0; k < kTimeSamples; ++k) {
    const double t = sample_time(k);
    const double w = cert.Wstar(t, zero);
    if (!(std::fabs(w) <= kZeroTol)) {
      throw ConfigError("Wstar(t, 0) must vanish: Wstar = " + fmt(w) +
                        " at t = " + fmt(t));
    }
  }
}

void validate_matrosov(const MatrosovData& md, const SystemDef& sys) {
  require_dimension(md.W, sys.n, "W");
  require_dimension(md.Vstar, sys.n, "Vstar");
  if (md.Vstar.uses_time()) throw ConfigError("Vstar must be time-independent");
  if (!(md.alpha > 0.0) || !(md.alpha < md.A)) {
    throw ConfigError("matrosov requires 0 < alpha < A (alpha = " +
                      fmt(md.alpha) + ", A = " + fmt(md.A) + ")");
  }
  if (md.A > sys.domain_radius) {
    throw ConfigError("matrosov A exceeds domain_radius");
  }
  if (!(md.r1 > 0.0)) throw ConfigError("matrosov requires r1 > 0");
  if (md.xi && !(*md.xi > 0.0)) throw ConfigError("matrosov requires xi > 0");
  if (md.L && !(*md.L >= 0.0)) throw ConfigError("matrosov requires L >= 0");
  if (!(md.zero_tol > 0.0)) throw ConfigError("zero_tol must be positive");
  if (md.E_distance) require_dimension(*md.E_distance, sys.n, "E_distance");
}

double integrate_beta(const Expression& beta) {
  const std::vector<double> none;
  return gauss_kronrod([&](double t) { return beta.evaluate(t, none); }, 0.0,
                       std::numeric_limits<double>::infinity(), 1e-13, 1e-13)
      .value;
}

LoadedConfig make_example17(const Example17Params& p, double domain_radius) {
  if (p.n < 1) throw ConfigError("example17 requires n >= 1");
  if (p.beta.max_variable() > 0) {
    throw ConfigError("example17 beta must depend on t only");
  }
  if (p.h.uses_time() || p.h.max_variable() > 1) {
    throw ConfigError("example17 h must be a function of x1 only");
  }
  const std::vector<double> none;
  for (int k = 0; k < kTimeSamples; ++k) {
    const double t = sample_time(k);
    if (!(p.beta.evaluate(t, none) > 0.0)) {
      throw ConfigError("example17 beta must be positive; fails at t = " +
                        fmt(t));
    }
  }
  for (int k = 0; k <= 200; ++k) {
    const double x = -domain_radius + 2.0 * domain_radius * k / 200.0;
    const double hx = p.h.evaluate(0.0, std::span<const double>(&x, 1));
    if (!(hx >= 0.0)) {
      throw ConfigError("example17 h must be nonnegative; fails at x = " +
                        fmt(x));
    }
  }
  const double m1 = p.M1 ? *p.M1 : integrate_beta(p.beta);
  if (!std::isfinite(m1)) throw ConfigError("example17 M1 must be finite");

  LoadedConfig c;
  c.system.n = p.n;
  c.system.domain_radius = domain_radius;
  c.system.label = "example17";
  const Expression one = Expression::constant(1.0);
  Expression wstar;
  for (int i = 1; i <= p.n; ++i) {
    const int remap[] = {i};
    const Expression xi = Expression::variable(i);
    const Expression denom = one + p.h.rename_variables(remap);
    c.system.f.push_back(p.beta * xi / denom);
    const Expression term = p.beta * (xi * xi) / denom;
    wstar = i == 1 ? term : wstar + term;
  }

  Certificate cert;
  cert.V = Expression::constant(0.5) * sum_of_squares(p.n);
  cert.Wstar = ScalarField(wstar);
  cert.V1 = cert.V;
  cert.V2 = cert.V;
  const Expression growth = Expression::unary(
      UnaryOp::kExp, Expression::constant(2.0 * m1));
  cert.M = Expression::constant(m1) * sum_of_squares(p.n) * growth;
  cert.mode = CertificateMode::kUniform;
  cert.tail = TailModel{p.beta, sum_of_squares(p.n) * growth};
  c.certificate = std::move(cert);
  return c;
}

std::vector<std::string> builtin_names() {
  return {"linear_decay", "unstable_linear", "example17",
          "matrosov_oscillator"};
}

LoadedConfig builtin(const std::string& name, const BuiltinParams& params) {
  LoadedConfig c;
  if (name == "linear_decay") {
    reject_unknown(params, {"domain_radius"}, name);
    c = simple_scalar(name, "-x1", true, CertificateMode::kUniformAsymptotic,
                      param_double(params, "domain_radius", 2.0));
  } else if (name == "unstable_linear") {
    reject_unknown(params, {"domain_radius"}, name);
    c = simple_scalar(name, "x1", false, CertificateMode::kUniform,
                      param_double(params, "domain_radius", 2.0));
  } else if (name == "example17") {
    reject_unknown(params, {"n", "beta", "h", "M1", "domain_radius"}, name);
    Example17Params p;
    p.n = static_cast<int>(param_double(params, "n", 2.0));
    p.beta = parse(param_text(params, "beta", "exp(-t)"), 1);
    p.h = parse(param_text(params, "h", "x1^2"), 1);
    if (params.count("M1")) p.M1 = param_double(params, "M1", 0.0);
    c = make_example17(p, param_double(params, "domain_radius", 3.0));
  } else if (name == "matrosov_oscillator") {
    reject_unknown(params, {"alpha", "A", "r1", "domain_radius"}, name);
    c.system.n = 2;
    c.system.f = {parse("x2", 2), parse("-x1 - (2 + sin(t))*x2", 2)};
    c.system.domain_radius = param_double(params, "domain_radius", 2.0);
    c.system.label = name;
    Certificate cert;
    cert.V = parse("0.5*(x1^2 + x2^2)", 2);
    cert.Wstar = ScalarField(parse("0", 2));
    cert.V1 = cert.V;
    cert.V2 = cert.V;
    cert.M = parse("0", 2);
    cert.mode = CertificateMode::kUniform;
    c.certificate = std::move(cert);
    MatrosovData md;
    md.W = parse("x1*x2", 2);
    md.Vstar = parse("-(x2^2)", 2);
    md.alpha = param_double(params, "alpha", 0.5);
    md.A = param_double(params, "A", 1.0);
    md.r1 = param_double(params, "r1", 0.01);
    md.E_distance = parse("abs(x2)", 2);
    c.matrosov = std::move(md);
  } else {
    throw ConfigError("unknown builtin '" + name + "'");
  }
  validate_system(c.system);
  if (c.certificate) validate_certificate(*c.certificate, c.system);
  if (c.matrosov) validate_matrosov(*c.matrosov, c.system);
  return c;
}

}  // namespace nastab
