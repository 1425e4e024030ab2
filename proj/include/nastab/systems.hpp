#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nastab/expr.hpp"

namespace nastab {

/// Configuration or contract violation detected while building a system.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-autonomous system x' = f(t, x) on the closed ball of radius
/// `domain_radius` around the origin.
struct SystemDef {
  int n = 1;
  std::vector<Expression> f;
  double domain_radius = 1.0;
  bool origin_is_equilibrium = true;
  std::string label;

  void rhs(double t, std::span<const double> x, std::span<double> out) const;
  std::vector<double> rhs(double t, std::span<const double> x) const;
};

/// Scalar function of (t, x). Either a parsed expression or a computed
/// field such as the piecewise W* of the Matrosov construction.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(Expression e);  // NOLINT(google-explicit-constructor)
  ScalarField(std::function<double(double, std::span<const double>)> fn,
              std::string description, bool time_dependent);

  double operator()(double t, std::span<const double> x) const;
  const std::string& description() const { return description_; }
  bool uses_time() const { return time_dependent_; }
  const std::optional<Expression>& expression() const { return expr_; }

 private:
  std::optional<Expression> expr_;
  std::function<double(double, std::span<const double>)> fn_;
  std::string description_ = "0";
  bool time_dependent_ = false;
};

enum class CertificateMode { kUniform, kUniformAsymptotic, kGlobal };

std::string to_string(CertificateMode mode);
CertificateMode parse_mode(const std::string& s);

/// Tail of the improper budget integral beyond the truncation horizon:
/// scale(x0) * integral_{T}^{inf} rate(t) dt bounds the omitted part.
struct TailModel {
  Expression rate;   // in t only
  Expression scale;  // in initial-state components x1..xn
};

/// The (V, W*) pair with comparison functions V1 <= V <= V2, optional strict
/// decay rate V3, and the budget M(x0) for the positive part of W*.
struct Certificate {
  Expression V;
  ScalarField Wstar;
  Expression V1;
  Expression V2;
  std::optional<ScalarField> V3;
  Expression M;  // variables x1..xn stand for the initial state
  CertificateMode mode = CertificateMode::kUniform;
  std::optional<TailModel> tail;
};

/// Auxiliary data for the Matrosov-type conditions: bounded W, the
/// nonpositive bound V* on V', and the probe annulus near E = {V* = 0}.
struct MatrosovData {
  Expression W;
  Expression Vstar;
  double alpha = 0.5;
  double A = 1.0;
  double r1 = 0.01;
  std::optional<double> xi;
  std::optional<double> L;
  double zero_tol = 1e-8;
  /// Exact distance to E when E is known in closed form.
  std::optional<Expression> E_distance;
};

struct Example17Params {
  int n = 2;
  Expression beta;  // in t
  Expression h;     // in x1, applied to each component
  std::optional<double> M1;
};

struct LoadedConfig {
  SystemDef system;
  std::optional<Certificate> certificate;
  std::optional<MatrosovData> matrosov;
};

/// Parses the TOML-style configuration and runs the sampled invariant
/// checks (equilibrium at the origin, W*(t,0) = 0, time-free comparison
/// functions). Throws ParseError or ConfigError.
LoadedConfig load_config(const std::string& text);
LoadedConfig load_config_file(const std::string& path);

/// Knobs accepted by `builtin`; unknown keys are rejected.
using BuiltinParams = std::map<std::string, std::string>;

/// One of linear_decay, unstable_linear, example17, matrosov_oscillator.
LoadedConfig builtin(const std::string& name, const BuiltinParams& params = {});

std::vector<std::string> builtin_names();

/// Right-hand side, certificate and budget for x_i' = beta(t) x_i / (1 + h(x_i)).
LoadedConfig make_example17(const Example17Params& p, double domain_radius);

/// integral_0^inf beta(t) dt by adaptive quadrature.
double integrate_beta(const Expression& beta);

/// Sampled contract checks, throwing ConfigError with the witness.
void validate_system(const SystemDef& sys);
void validate_certificate(const Certificate& cert, const SystemDef& sys);
void validate_matrosov(const MatrosovData& md, const SystemDef& sys);

}  // namespace nastab
