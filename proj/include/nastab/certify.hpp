#pragma once

// Sampling-based falsification of certificate conditions. A pass means no
// counterexample was found at the sampled resolution; it is not a proof.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nastab/integrate.hpp"
#include "nastab/sampling.hpp"
#include "nastab/systems.hpp"

namespace nastab {

enum class VerdictStatus { kPass, kFail, kInconclusive };

const char* to_string(VerdictStatus s);

struct Witness {
  double t = 0.0;
  std::vector<double> x;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string inequality;  // the violated `lhs <= rhs`, in words
};

struct Verdict {
  std::string check;
  VerdictStatus status = VerdictStatus::kPass;
  std::optional<Witness> witness;
  /// Slack rhs - lhs over the checked samples.
  double margin_min = 0.0;
  double margin_mean = 0.0;
  double margin_max = 0.0;
  std::size_t samples = 0;
  std::string notes;
};

/// lhs exceeds rhs by more than rounding noise.
bool violates(double lhs, double rhs);

/// V1(x) <= V(t,x) <= V2(x) with V1, V2 positive away from 0 and zero at 0.
Verdict check_sandwich(const Certificate& cert, const SystemDef& sys,
                       const SamplingPlan& plan);

/// dV/dt + dV/dx f - max{W*, 0} <= 0 (uniform) or <= -V3(x) (asymptotic
/// and global modes). Throws std::invalid_argument if V3 is required but
/// missing.
Verdict check_decay(const Certificate& cert, const SystemDef& sys,
                    const SamplingPlan& plan);

/// V1 grows without bound along rays: the minimum of V1 over sampled
/// directions must increase over radii 10^0 ... 10^6 and end at least
/// 100 times its value at radius 1.
Verdict check_radially_unbounded(const Certificate& cert, const SystemDef& sys,
                                 std::size_t directions = 0);

struct InitialCondition {
  double t0 = 0.0;
  std::vector<double> x0;
};

struct BudgetEntry {
  InitialCondition ic;
  TrajectoryStatus trajectory = TrajectoryStatus::kCompleted;
  VerdictStatus status = VerdictStatus::kPass;
  double used = 0.0;         // integral of max{W*,0} over [t0, end]
  double quad_error = 0.0;
  std::optional<double> tail;  // bound on the part beyond T_max
  double budget = 0.0;       // M(x0)
  std::string notes;
};

struct BudgetResult {
  Verdict verdict;
  std::vector<BudgetEntry> entries;
  double worst_ratio = 0.0;  // max over entries of (used + tail) / budget
};

struct BudgetOptions {
  double T_max = 50.0;
  IntegrateOptions integrate;
  unsigned threads = 1;
};

/// integral_{t0}^{T_max} max{W*, 0} plus the tail bound must not exceed
/// M(x0) for every initial condition. Trajectories that leave the domain
/// are inconclusive unless their partial integral already exceeds M(x0).
BudgetResult check_integral_budget(const Certificate& cert,
                                   const SystemDef& sys,
                                   const std::vector<InitialCondition>& init,
                                   const BudgetOptions& opts = {});

/// Initial conditions at each t0 from low-discrepancy points in the ball of
/// radius `radius`.
std::vector<InitialCondition> sample_initial_conditions(
    int n, double radius, std::span<const double> t0s, std::size_t per_t0,
    std::uint64_t seed);

// ---------------------------------------------------------------------------
// Matrosov-type conditions.

/// dW/dt + dW/dx f(t, x), the derivative of W along solutions.
double derivative_along(const Expression& W, const SystemDef& sys, double t,
                        std::span<const double> x);

/// Distance from x to E = {V* = 0}: the closed form when md.E_distance is
/// set, otherwise nearest point of a sampled cloud of E refined by
/// projected descent.
class ZeroSetDistance {
 public:
  ZeroSetDistance(const MatrosovData& md, const SystemDef& sys,
                  double half_width, std::uint64_t seed = 0);
  double operator()(std::span<const double> x) const;
  bool exact() const { return md_.E_distance.has_value(); }
  std::size_t cloud_size() const { return cloud_.size() / static_cast<std::size_t>(n_); }

 private:
  bool project(std::span<double> y) const;
  MatrosovData md_;
  int n_;
  std::vector<double> cloud_;
};

struct DefinitenessEstimate {
  VerdictStatus status = VerdictStatus::kInconclusive;
  double xi_hat = 0.0;   // min |W'| over the probe set
  double r1 = 0.0;
  double alpha = 0.0;
  double A = 0.0;
  double min_t = 0.0;
  std::vector<double> min_x;
  /// Largest r <= r1 with min |W'| >= md.xi over probes closer than r to E.
  std::optional<double> r1_max;
  double L_hat = 0.0;  // sup |W| over the probe set
  std::size_t probe_samples = 0;
  std::string notes;
};

/// Estimates the lower bound xi on |W'| over alpha < |x| < A,
/// dist(x, E) < r1, t in [0, T_check]. Throws std::invalid_argument unless
/// 0 < alpha < A.
DefinitenessEstimate matrosov_definiteness(const MatrosovData& md,
                                           const SystemDef& sys,
                                           const SamplingPlan& plan);

/// Builds the (V, W*) pair from Matrosov data: W* = |W'| on |V*| <= zero_tol
/// and 0 elsewhere; V3 = -V* off the zero set and, on it, half the smaller
/// of xi and the minimum of |W'| over a time grid on [0, T_check].
Certificate matrosov_construct(const MatrosovData& md, const SystemDef& sys,
                               const Certificate& base, double xi,
                               const Expression& budget, double T_check = 100.0);

struct DwellTrajectoryReport {
  InitialCondition ic;
  TrajectoryStatus trajectory = TrajectoryStatus::kCompleted;
  std::size_t N = 0;
  double max_dwell = 0.0;
  double dwell_bound = 0.0;      // 2L / xi
  double L = 0.0;
  std::optional<double> a_hat;   // min V drop between consecutive entries
  std::optional<std::size_t> N_bound;
  double integral_total = 0.0;   // sum of integral |W'| over dwells
  double integral_bound = 0.0;   // N * 2L
  double X_hat = 0.0;            // sup |f| over samples in U
  std::optional<double> a_formula;  // xi r1 / (2 X_hat sqrt(n))
  std::vector<DwellInterval> dwells;
  VerdictStatus status = VerdictStatus::kPass;
  std::string notes;
};

struct DwellResult {
  Verdict verdict;
  std::vector<DwellTrajectoryReport> trajectories;
};

/// Checks the dwell-time consequences of |W'| > xi in the probe region U:
/// each dwell in U lasts at most 2L/xi; entries are finitely many, at most
/// floor(V(t0,x0)/a_hat) + 1; and the integral of |W'| over dwells is at
/// most N * 2L. L is the larger of `L_region` and sup |W| seen in U.
DwellResult dwell_bound_check(const MatrosovData& md, const SystemDef& sys,
                              const Expression& V,
                              const std::vector<Trajectory>& trajectories,
                              double xi, double L_region,
                              const ZeroSetDistance& distance);

}  // namespace nastab
