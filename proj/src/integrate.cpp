#include "nastab/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace nastab {

const char* to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::kCompleted: return "completed";
    case TrajectoryStatus::kBlowUp: return "blow_up";
    case TrajectoryStatus::kLeftDomain: return "left_domain";
  }
  return "completed";
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void dense_eval(const Segment& s, int n, double theta, std::span<double> out) {
  const double theta1 = 1.0 - theta;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i < un; ++i) {
    const double r2 = s.dense[i];
    const double r3 = s.dense[un + i];
    const double r4 = s.dense[2 * un + i];
    const double r5 = s.dense[3 * un + i];
    out[i] = s.y0[i] + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
  }
}

void segment_state(const Segment& s, int n, double t, std::span<double> out) {
  if (t == s.t) {
    std::copy(s.y0.begin(), s.y0.end(), out.begin());
    return;
  }
  if (t == s.t + s.h) {
    std::copy(s.y1.begin(), s.y1.end(), out.begin());
    return;
  }
  dense_eval(s, n, (t - s.t) / s.h, out);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::size_t Trajectory::locate(double t) const {
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](double value, const Segment& s) { return value < s.t; });
  if (it == segments_.begin()) return 0;
  return static_cast<std::size_t>(it - segments_.begin()) - 1;
}

void Trajectory::sample_into(double t, std::span<double> out) const {
  if (!(t >= t0_ && t <= tf_)) {
    throw std::out_of_range("sample time " + fmt(t) + " outside [" +
                            fmt(t0_) + ", " + fmt(tf_) + "]");
  }
  if (t == t0_ || segments_.empty()) {
    std::copy(x0_.begin(), x0_.end(), out.begin());
    return;
  }
  segment_state(segments_[locate(t)], n_, t, out);
}

std::vector<double> Trajectory::sample(double t) const {
  std::vector<double> out(static_cast<std::size_t>(n_));
  sample_into(t, out);
  return out;
}

std::vector<double> Trajectory::scan_times(int per_segment) const {
  std::vector<double> times;
  times.reserve(segments_.size() * static_cast<std::size_t>(per_segment) + 1);
  for (const auto& s : segments_) {
    for (int k = 0; k < per_segment; ++k) {
      const double t = s.t + s.h * k / per_segment;
      if (t >= tf_) break;
      times.push_back(t);
    }
  }
  times.push_back(tf_);
  return times;
}

double Trajectory::max_norm(int per_segment) const {
  double best = 0.0;
  std::vector<double> x(static_cast<std::size_t>(n_));
  for (double t : scan_times(per_segment)) {
    sample_into(t, x);
    best = std::max(best, norm2(x));
  }
  return best;
}

Trajectory integrate(const SystemDef& sys, std::span<const double> x0,
                     double t0, double tf, const IntegrateOptions& opts) {
  if (!(tf > t0)) throw std::invalid_argument("integrate requires tf > t0");
  if (static_cast<int>(x0.size()) != sys.n) {
    throw std::invalid_argument("initial state has wrong dimension");
  }
  const double radius = opts.exit_radius.value_or(sys.domain_radius);
  if (opts.stop_at_domain_exit && norm2(x0) > radius) {
    throw std::invalid_argument("initial state lies outside the domain ball");
  }

  const int n = sys.n;
  const auto un = static_cast<std::size_t>(n);
  Trajectory traj;
  traj.n_ = n;
  traj.t0_ = t0;
  traj.tf_ = t0;
  traj.t_requested_ = tf;
  traj.abs_tol_ = opts.abs_tol;
  traj.rel_tol_ = opts.rel_tol;
  traj.x0_.assign(x0.begin(), x0.end());

  std::vector<double> y(x0.begin(), x0.end()), y1(un), ytmp(un), err(un);
  std::vector<double> k1(un), k2(un), k3(un), k4(un), k5(un), k6(un), k7(un);
  auto& stats = traj.stats_;
  auto f = [&](double t, std::span<const double> x, std::span<double> out) {
    ++stats.rhs_evaluations;
    sys.rhs(t, x, out);
  };
  auto scaled_norm = [&](std::span<const double> a, std::span<const double> b,
                         std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < un; ++i) {
      const double sk =
          opts.abs_tol + opts.rel_tol * std::max(std::fabs(a[i]), std::fabs(b[i]));
      s += (v[i] / sk) * (v[i] / sk);
    }
    return std::sqrt(s / static_cast<double>(un));
  };

  double t = t0;
  f(t, y, k1);

  double h = opts.initial_step;
  if (h <= 0.0) {
    const double dn0 = scaled_norm(y, y, y);
    const double dn1 = scaled_norm(y, y, k1);
    double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
    h0 = std::min(h0, tf - t0);
    for (std::size_t i = 0; i < un; ++i) ytmp[i] = y[i] + h0 * k1[i];
    f(t + h0, ytmp, k2);
    for (std::size_t i = 0; i < un; ++i) err[i] = (k2[i] - k1[i]) / h0;
    const double dn2 = scaled_norm(y, y, err);
    const double dmax = std::max(dn1, dn2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                    : std::pow(0.01 / dmax, 0.2);
    h = std::min(100.0 * h0, h1);
  }
  if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
  h = std::min(h, tf - t0);

  constexpr double kSafety = 0.9, kFacMin = 0.2, kFacMax = 10.0, kBeta = 0.04;
  const double expo = 0.2 - kBeta * 0.75;
  double facold = 1e-4;
  bool last_rejected = false;
  const double eps = std::numeric_limits<double>::epsilon();

  while (t < tf) {
    if (stats.accepted + stats.rejected >= opts.max_steps) {
      throw IntegrationError("step limit reached at t = " + fmt(t), t, 0.0);
    }
    if (t + 1.01 * h >= tf) h = tf - t;
    if (h < 16.0 * eps * std::max(1.0, std::fabs(t))) {
      throw IntegrationError("step size underflow at t = " + fmt(t), t,
                             scaled_norm(y, y1, err));
    }

    for (std::size_t i = 0; i < un; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    f(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < un; ++i) {
      ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    }
    f(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < un; ++i) {
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    }
    f(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < un; ++i) {
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    }
    f(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < un; ++i) {
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                            a64 * k4[i] + a65 * k5[i]);
    }
    const double tnew = t + h == tf || t + h > tf ? tf : t + h;
    f(tnew, ytmp, k6);
    for (std::size_t i = 0; i < un; ++i) {
      y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                          a75 * k5[i] + a76 * k6[i]);
    }
    f(tnew, y1, k7);
    for (std::size_t i = 0; i < un; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                    e6 * k6[i] + e7 * k7[i]);
    }
    const double enorm = scaled_norm(y, y1, err);

    if (!std::isfinite(enorm)) {
      ++stats.rejected;
      last_rejected = true;
      h *= 0.1;
      continue;
    }
    const double fac11 = std::pow(std::max(enorm, 1e-300), expo);
    if (enorm > 1.0) {
      ++stats.rejected;
      h /= std::min(1.0 / kFacMin, fac11 / kSafety);
      last_rejected = true;
      continue;
    }

    Segment seg;
    seg.t = t;
    seg.h = tnew - t;
    seg.y0 = y;
    seg.y1 = y1;
    seg.dense.resize(4 * un);
    for (std::size_t i = 0; i < un; ++i) {
      const double ydiff = y1[i] - y[i];
      const double bspl = h * k1[i] - ydiff;
      seg.dense[i] = ydiff;
      seg.dense[un + i] = bspl;
      seg.dense[2 * un + i] = ydiff - h * k7[i] - bspl;
      seg.dense[3 * un + i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] +
                                   d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    ++stats.accepted;

    // Domain exit and blow-up are tested on interior dense samples too.
    double stop_time = tnew;
    bool stop = false;
    double prev_theta = 0.0;
    for (double theta : {0.25, 0.5, 0.75, 1.0}) {
      if (theta < 1.0) {
        dense_eval(seg, n, theta, ytmp);
      } else {
        std::copy(y1.begin(), y1.end(), ytmp.begin());
      }
      const double nrm = norm2(ytmp);
      if (opts.stop_at_domain_exit && nrm > radius) {
        double lo = prev_theta, hi = theta;
        while ((hi - lo) * seg.h > opts.event_time_tol) {
          const double mid = 0.5 * (lo + hi);
          dense_eval(seg, n, mid, ytmp);
          (norm2(ytmp) > radius ? hi : lo) = mid;
        }
        stop_time = hi >= 1.0 ? tnew : seg.t + hi * seg.h;
        traj.status_ = TrajectoryStatus::kLeftDomain;
        stop = true;
        break;
      }
      if (!opts.stop_at_domain_exit &&
          (!std::isfinite(nrm) || nrm > opts.blow_up_factor * radius)) {
        traj.status_ = TrajectoryStatus::kBlowUp;
        stop = true;
        break;
      }
      prev_theta = theta;
    }
    traj.segments_.push_back(std::move(seg));
    traj.tf_ = stop_time;
    if (stop) break;

    std::swap(k1, k7);
    y = y1;
    t = tnew;

    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::max(1.0 / kFacMax, std::min(1.0 / kFacMin, fac / kSafety));
    double hnew = h / fac;
    if (last_rejected) hnew = std::min(hnew, h);
    if (opts.max_step > 0.0) hnew = std::min(hnew, opts.max_step);
    facold = std::max(enorm, 1e-4);
    last_rejected = false;
    h = hnew;
  }
  return traj;
}

QuadResult path_integral(const Trajectory& traj, const PathIntegrand& g,
                         std::optional<double> a_opt,
                         std::optional<double> b_opt, double abs_tol,
                         double rel_tol) {
  const double a = a_opt.value_or(traj.t0());
  const double b = b_opt.value_or(traj.tf());
  if (a < traj.t0() || b > traj.tf() || a > b) {
    throw std::out_of_range("path integral bounds outside trajectory");
  }
  QuadResult total;
  if (a == b) return total;
  const int n = traj.dimension();
  std::vector<double> x(static_cast<std::size_t>(n));
  for (const auto& seg : traj.segments()) {
    const double lo = std::max(a, seg.t);
    const double hi = std::min({b, seg.t + seg.h, traj.tf()});
    if (!(hi > lo)) continue;
    auto integrand = [&](double t) {
      segment_state(seg, n, t, x);
      return g(t, x);
    };
    const double share = (hi - lo) / (b - a);
    const QuadResult piece =
        gauss_kronrod(integrand, lo, hi, abs_tol * share, rel_tol);
    total.value += piece.value;
    total.error += piece.error;
  }
  return total;
}

QuadResult path_integral(const Trajectory& traj, const Expression& g,
                         std::optional<double> a, std::optional<double> b,
                         double abs_tol, double rel_tol) {
  return path_integral(
      traj,
      [&g](double t, std::span<const double> x) { return g.evaluate(t, x); },
      a, b, abs_tol, rel_tol);
}

double DwellIntervals::total_integral() const {
  double s = 0.0;
  for (const auto& d : intervals) s += d.integral.value;
  return s;
}

DwellIntervals detect_dwells(const Trajectory& traj,
                             const RegionPredicate& inside,
                             const PathIntegrand& integrand,
                             const DwellOptions& opts) {
  DwellIntervals out;
  std::vector<double> x(static_cast<std::size_t>(traj.dimension()));
  auto test = [&](double t) {
    traj.sample_into(t, x);
    return inside(t, x);
  };
  // Bisect a sign change of the predicate inside (lo, hi).
  auto refine = [&](double lo, double hi, bool lo_state) {
    while (hi - lo > opts.time_tol) {
      const double mid = 0.5 * (lo + hi);
      if (test(mid) == lo_state) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  const auto times = traj.scan_times(opts.scan_per_segment);
  bool state = test(times.front());
  double enter = times.front();
  for (std::size_t k = 1; k < times.size(); ++k) {
    const bool now = test(times[k]);
    if (now == state) continue;
    const double crossing = refine(times[k - 1], times[k], state);
    if (now) {
      enter = crossing;
    } else {
      out.intervals.push_back({enter, crossing, {}});
    }
    state = now;
  }
  if (state) out.intervals.push_back({enter, traj.tf(), {}});
  if (integrand) {
    for (auto& d : out.intervals) {
      d.integral = path_integral(traj, integrand, d.enter, d.exit);
    }
  }
  return out;
}

void write_csv(const Trajectory& traj, std::span<const double> grid,
               std::ostream& out) {
  out << "t";
  for (int i = 1; i <= traj.dimension(); ++i) out << ",x" << i;
  out << "\n";
  char buf[40];
  std::vector<double> x(static_cast<std::size_t>(traj.dimension()));
  for (double t : grid) {
    traj.sample_into(t, x);
    std::snprintf(buf, sizeof buf, "%.17g", t);
    out << buf;
    for (double v : x) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    out << "\n";
  }
}

std::vector<double> uniform_grid(double t0, double tf, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("grid step must be positive");
  std::vector<double> grid;
  const auto steps = static_cast<std::size_t>(std::floor((tf - t0) / dt + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    if (t < tf - 1e-12 * std::max(1.0, std::fabs(tf))) grid.push_back(t);
  }
  grid.push_back(tf);
  return grid;
}

}  // namespace nastab
