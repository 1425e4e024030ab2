#pragma once

// Empirical probes of the stability definitions: epsilon-delta tables
// across initial times, settling times, and the explicit bounds for the
// x_i' = beta(t) x_i / (1 + h(x_i)) family.

#include <optional>
#include <string>
#include <vector>

#include "nastab/certify.hpp"
#include "nastab/integrate.hpp"
#include "nastab/systems.hpp"

namespace nastab {

struct StabilityOptions {
  double horizon = 50.0;
  std::size_t directions = 0;  // 0 picks default_direction_count(n)
  /// Also start from interior points of the ball, not only its sphere.
  bool full_ball = false;
  double bisection_rel_tol = 1e-3;
  IntegrateOptions integrate;
  unsigned threads = 1;
  std::uint64_t seed = 0;
};

struct DeltaEstimate {
  double epsilon = 0.0;
  double t0 = 0.0;
  double delta = 0.0;
  /// Direction whose trajectory reached epsilon at the smallest failing
  /// radius; empty when every probed radius passed.
  std::vector<double> witness_direction;
  double witness_radius = 0.0;
  std::size_t trajectories = 0;
};

/// Largest r in (0, epsilon] such that every sampled direction started at
/// r * dir keeps |x(t)| < epsilon on [t0, t0 + horizon], by bisection to
/// the relative tolerance. Returns 0 when even epsilon * 1e-6 escapes.
DeltaEstimate estimate_delta(const SystemDef& sys, double epsilon, double t0,
                             const StabilityOptions& opts = {});

struct StabilityReport {
  std::vector<double> epsilons;
  std::vector<double> t0s;
  /// delta[i][j] for epsilons[i], t0s[j].
  std::vector<std::vector<DeltaEstimate>> delta;
  std::vector<double> uniform_delta;  // min over t0 per epsilon
  std::vector<double> spread;         // (max - min) / min per epsilon
  bool uniformly_stable = false;
  bool delta_nondecreasing = false;
  double horizon = 0.0;
  std::size_t directions = 0;
  std::size_t trajectories = 0;
  std::string notes;
};

StabilityReport uniformity_report(const SystemDef& sys,
                                  const std::vector<double>& epsilons,
                                  const std::vector<double>& t0s,
                                  const StabilityOptions& opts = {});

struct SettlingRow {
  double t0 = 0.0;
  std::optional<double> T;  // empty when not attained within the horizon
  std::vector<double> worst_x0;
};

struct SettlingTable {
  double eta = 0.0;
  double c = 0.0;
  std::vector<SettlingRow> rows;
  std::optional<double> uniform_T;  // max over t0 when all attained
  double spread = 0.0;              // (max - min) / max over attained rows
  std::string notes;
};

/// Smallest T such that |x(t)| < eta on [t0 + T, t0 + horizon] for every
/// sampled x0 with |x0| <= c (1 - 1e-6); maximized over x0 per t0.
SettlingTable settling_time(const SystemDef& sys, double eta, double c,
                            const std::vector<double>& t0s,
                            const StabilityOptions& opts = {});

struct Example17Entry {
  InitialCondition ic;
  double sup_norm_sq = 0.0;
  double bound_norm_sq = 0.0;  // |x0|^2 e^{2 M1}
  double integral = 0.0;
  double quad_error = 0.0;
  double tail = 0.0;
  double budget = 0.0;         // M1 |x0|^2 e^{2 M1}
  double max_residual = 0.0;   // max |V' - max{W*,0}| along the trajectory
  VerdictStatus status = VerdictStatus::kPass;
  std::string notes;
};

struct Example17Result {
  Verdict verdict;
  double M1 = 0.0;
  std::vector<Example17Entry> entries;
};

/// Checks along each trajectory: |x(t)|^2 <= |x0|^2 e^{2 M1} (1 + 1e-6),
/// integral max{W*,0} <= M1 |x0|^2 e^{2 M1} (1 + 1e-6), and
/// |V' - max{W*,0}| <= 1e-9 at every scanned point.
Example17Result example17_bounds_check(const Example17Params& params,
                                       const std::vector<InitialCondition>& init,
                                       double T_max,
                                       const IntegrateOptions& integrate_opts = {},
                                       unsigned threads = 1);

}  // namespace nastab
