#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "nastab/quadrature.hpp"
#include "nastab/systems.hpp"

namespace nastab {

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& msg, double t, double error_estimate)
      : std::runtime_error(msg), t_(t), error_estimate_(error_estimate) {}
  double t() const { return t_; }
  double error_estimate() const { return error_estimate_; }

 private:
  double t_;
  double error_estimate_;
};

struct IntegrateOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  /// Stop when |x| leaves the domain ball (status left_domain).
  bool stop_at_domain_exit = true;
  /// Overrides SystemDef::domain_radius for the exit test.
  std::optional<double> exit_radius;
  /// |x| > blow_up_factor * domain_radius ends the run as blow_up.
  double blow_up_factor = 1e6;
  /// Time tolerance for locating domain exits on the dense output.
  double event_time_tol = 1e-9;
  double initial_step = 0.0;  // 0 picks a step automatically
  double max_step = 0.0;      // 0 means unbounded
  std::size_t max_steps = 2'000'000;
};

enum class TrajectoryStatus { kCompleted, kBlowUp, kLeftDomain };

const char* to_string(TrajectoryStatus s);

/// Accepted Dormand-Prince step with its continuous extension.
struct Segment {
  double t = 0.0;
  double h = 0.0;
  std::vector<double> y0;
  std::vector<double> y1;
  // Hairer's dense output coefficients r2..r5 (r1 is y0), flattened n-wise.
  std::vector<double> dense;
};

struct TrajectoryStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

/// Immutable dense-output solution of x' = f(t, x) on [t0, tf].
class Trajectory {
 public:
  double t0() const { return t0_; }
  /// End of the recorded solution; the domain exit time for left_domain.
  double tf() const { return tf_; }
  /// The horizon that was requested.
  double t_requested() const { return t_requested_; }
  int dimension() const { return n_; }
  TrajectoryStatus status() const { return status_; }
  const TrajectoryStats& stats() const { return stats_; }
  double abs_tol() const { return abs_tol_; }
  double rel_tol() const { return rel_tol_; }
  const std::vector<Segment>& segments() const { return segments_; }
  std::span<const double> x0() const { return x0_; }

  std::vector<double> sample(double t) const;
  void sample_into(double t, std::span<double> out) const;

  /// Times of the sampling grid used by scans: every segment start plus
  /// `per_segment - 1` interior points, and tf.
  std::vector<double> scan_times(int per_segment = 8) const;

  /// sup |x(t)| over scan_times(per_segment).
  double max_norm(int per_segment = 8) const;

 private:
  friend Trajectory integrate(const SystemDef&, std::span<const double>,
                              double, double, const IntegrateOptions&);
  std::size_t locate(double t) const;

  int n_ = 0;
  double t0_ = 0.0;
  double tf_ = 0.0;
  double t_requested_ = 0.0;
  double abs_tol_ = 0.0;
  double rel_tol_ = 0.0;
  std::vector<double> x0_;
  std::vector<Segment> segments_;
  TrajectoryStatus status_ = TrajectoryStatus::kCompleted;
  TrajectoryStats stats_;
};

/// Adaptive Dormand-Prince 5(4) with PI step control and 4th-order dense
/// output. Throws IntegrationError on step-size underflow and DomainError
/// if f cannot be evaluated.
Trajectory integrate(const SystemDef& sys, std::span<const double> x0,
                     double t0, double tf, const IntegrateOptions& opts = {});

using PathIntegrand = std::function<double(double, std::span<const double>)>;

/// integral of g(t, x(t)) over [a, b] within the trajectory, segment by
/// segment with adaptive Gauss-Kronrod. Defaults to [t0, tf].
QuadResult path_integral(const Trajectory& traj, const PathIntegrand& g,
                         std::optional<double> a = std::nullopt,
                         std::optional<double> b = std::nullopt,
                         double abs_tol = 1e-11, double rel_tol = 1e-11);
QuadResult path_integral(const Trajectory& traj, const Expression& g,
                         std::optional<double> a = std::nullopt,
                         std::optional<double> b = std::nullopt,
                         double abs_tol = 1e-11, double rel_tol = 1e-11);

using RegionPredicate = std::function<bool(double, std::span<const double>)>;

struct DwellInterval {
  double enter = 0.0;
  double exit = 0.0;
  QuadResult integral;
  double length() const { return exit - enter; }
};

struct DwellIntervals {
  std::vector<DwellInterval> intervals;
  double total_integral() const;
};

struct DwellOptions {
  double time_tol = 1e-9;
  int scan_per_segment = 16;
};

/// Maximal intervals on which `inside` holds along the trajectory, with
/// entry and exit times refined by bisection on the dense output. When
/// `integrand` is given, its path integral over each interval is attached.
DwellIntervals detect_dwells(const Trajectory& traj,
                             const RegionPredicate& inside,
                             const PathIntegrand& integrand = {},
                             const DwellOptions& opts = {});

/// CSV with header `t,x1,...,xn`, one row per grid time.
void write_csv(const Trajectory& traj, std::span<const double> grid,
               std::ostream& out);

/// t0, t0 + dt, ... and finally tf (always included).
std::vector<double> uniform_grid(double t0, double tf, double dt);

}  // namespace nastab
