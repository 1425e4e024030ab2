#include "nastab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nastab/quadrature.hpp"
#include "nastab/sampling.hpp"

namespace nastab {
namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Unit-sphere directions, plus interior points of the unit ball in
// full-ball mode. Starting states are r times these.
std::vector<std::vector<double>> directions_for(const SystemDef& sys,
                                                const StabilityOptions& opts) {
  const std::size_t count =
      opts.directions ? opts.directions : default_direction_count(sys.n);
  auto dirs = sphere_directions(sys.n, count, opts.seed);
  if (!opts.full_ball) return dirs;
  SamplingPlan plan;
  plan.samples = count;
  plan.seed = opts.seed;
  const SampleSet ball = sample_time_state(plan, sys.n, 1.0);
  for (std::size_t i = 0; i < ball.size(); ++i) {
    auto x = ball.state(i);
    dirs.emplace_back(x.begin(), x.end());
  }
  return dirs;
}

}  // namespace

DeltaEstimate estimate_delta(const SystemDef& sys, double epsilon, double t0,
                             const StabilityOptions& opts) {
  if (!(epsilon > 0.0) || epsilon > sys.domain_radius) {
    throw std::invalid_argument("estimate_delta requires 0 < epsilon <= domain_radius");
  }
  DeltaEstimate est;
  est.epsilon = epsilon;
  est.t0 = t0;
  const auto dirs = directions_for(sys, opts);
  IntegrateOptions iopts = opts.integrate;
  iopts.stop_at_domain_exit = true;
  iopts.exit_radius = epsilon;

  // Index of the first direction whose trajectory reaches epsilon.
  auto escape = [&](double r) -> std::optional<std::size_t> {
    std::vector<char> escaped(dirs.size(), 0);
    parallel_for(dirs.size(), opts.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t d = b; d < e; ++d) {
        std::vector<double> x0(dirs[d]);
        for (double& v : x0) v *= r;
        try {
          const Trajectory traj = integrate(sys, x0, t0, t0 + opts.horizon, iopts);
          escaped[d] = traj.status() != TrajectoryStatus::kCompleted ||
                       !(traj.max_norm(8) < epsilon);
        } catch (const IntegrationError&) {
          escaped[d] = 1;
        }
      }
    });
    est.trajectories += dirs.size();
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      if (escaped[d]) return d;
    }
    return std::nullopt;
  };

  double lo = epsilon * 1e-6;
  double hi = epsilon;
  if (auto d = escape(lo)) {
    est.delta = 0.0;
    est.witness_direction = dirs[*d];
    est.witness_radius = lo;
    return est;
  }
  while (hi - lo > opts.bisection_rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (auto d = escape(mid)) {
      hi = mid;
      est.witness_direction = dirs[*d];
      est.witness_radius = mid;
    } else {
      lo = mid;
    }
  }
  est.delta = lo;
  return est;
}

StabilityReport uniformity_report(const SystemDef& sys,
                                  const std::vector<double>& epsilons,
                                  const std::vector<double>& t0s,
                                  const StabilityOptions& opts) {
  if (epsilons.empty() || t0s.empty()) {
    throw std::invalid_argument("uniformity_report needs non-empty grids");
  }
  StabilityReport rep;
  rep.epsilons = epsilons;
  rep.t0s = t0s;
  rep.horizon = opts.horizon;
  rep.directions = directions_for(sys, opts).size();
  rep.uniformly_stable = true;
  for (double eps : epsilons) {
    std::vector<DeltaEstimate> row;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double t0 : t0s) {
      row.push_back(estimate_delta(sys, eps, t0, opts));
      rep.trajectories += row.back().trajectories;
      lo = std::min(lo, row.back().delta);
      hi = std::max(hi, row.back().delta);
    }
    rep.delta.push_back(std::move(row));
    rep.uniform_delta.push_back(lo);
    rep.spread.push_back(lo > 0.0 ? (hi - lo) / lo
                                  : std::numeric_limits<double>::infinity());
    if (!(lo > 0.0)) rep.uniformly_stable = false;
  }

  rep.delta_nondecreasing = true;
  std::vector<std::size_t> order(epsilons.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return epsilons[a] < epsilons[b]; });
  for (std::size_t j = 0; j < t0s.size(); ++j) {
    for (std::size_t k = 1; k < order.size(); ++k) {
      const double prev = rep.delta[order[k - 1]][j].delta;
      const double next = rep.delta[order[k]][j].delta;
      if (next < prev * (1.0 - opts.bisection_rel_tol)) rep.delta_nondecreasing = false;
    }
  }
  rep.notes = "for all t >= t0 is checked on the finite horizon " +
              std::to_string(opts.horizon) +
              "; delta is probed on sphere directions only; delta -> infinity "
              "as epsilon -> infinity is out of reach on a bounded domain";
  return rep;
}

SettlingTable settling_time(const SystemDef& sys, double eta, double c,
                            const std::vector<double>& t0s,
                            const StabilityOptions& opts) {
  if (!(eta > 0.0) || !(eta < c) || c > sys.domain_radius) {
    throw std::invalid_argument("settling_time requires 0 < eta < c <= domain_radius");
  }
  SettlingTable table;
  table.eta = eta;
  table.c = c;
  const auto dirs = directions_for(sys, opts);
  std::vector<std::vector<double>> starts;
  for (double frac : {1.0, 0.75, 0.5, 0.25}) {
    for (const auto& d : dirs) {
      std::vector<double> x0(d);
      for (double& v : x0) v *= frac * c * (1.0 - 1e-6);
      starts.push_back(std::move(x0));
    }
  }
  IntegrateOptions iopts = opts.integrate;
  iopts.stop_at_domain_exit = true;

  for (double t0 : t0s) {
    // NaN marks "not attained".
    std::vector<double> T(starts.size(), 0.0);
    parallel_for(starts.size(), opts.threads, [&](std::size_t b, std::size_t e) {
      std::vector<double> x(static_cast<std::size_t>(sys.n));
      for (std::size_t k = b; k < e; ++k) {
        const Trajectory traj = integrate(sys, starts[k], t0, t0 + opts.horizon, iopts);
        if (traj.status() != TrajectoryStatus::kCompleted) {
          T[k] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        const auto times = traj.scan_times(16);
        std::vector<double> norms(times.size());
        for (std::size_t i = 0; i < times.size(); ++i) {
          traj.sample_into(times[i], x);
          norms[i] = norm(x);
        }
        if (norms.back() >= eta) {
          T[k] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        std::size_t last = times.size();
        for (std::size_t i = times.size(); i-- > 0;) {
          if (norms[i] >= eta) {
            last = i;
            break;
          }
        }
        if (last == times.size()) {
          T[k] = 0.0;
          continue;
        }
        double lo = times[last], hi = times[last + 1];
        while (hi - lo > 1e-9) {
          const double mid = 0.5 * (lo + hi);
          traj.sample_into(mid, x);
          (norm(x) >= eta ? lo : hi) = mid;
        }
        T[k] = hi - t0;
      }
    });
    SettlingRow row;
    row.t0 = t0;
    bool attained = true;
    double worst = 0.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < T.size(); ++k) {
      if (std::isnan(T[k])) {
        if (attained) arg = k;
        attained = false;
      } else if (attained && T[k] > worst) {
        worst = T[k];
        arg = k;
      }
    }
    if (attained) row.T = worst;
    row.worst_x0 = starts[arg];
    table.rows.push_back(std::move(row));
  }

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool all = true;
  for (const auto& r : table.rows) {
    if (!r.T) {
      all = false;
      continue;
    }
    lo = std::min(lo, *r.T);
    hi = std::max(hi, *r.T);
  }
  if (all) {
    table.uniform_T = hi;
    table.spread = hi > 0.0 ? (hi - lo) / hi : 0.0;
  } else {
    table.notes = "not attained: |x(t)| >= eta persists to the end of the horizon "
                  "for some initial state";
  }
  return table;
}

Example17Result example17_bounds_check(const Example17Params& params,
                                       const std::vector<InitialCondition>& init,
                                       double T_max,
                                       const IntegrateOptions& integrate_opts,
                                       unsigned threads) {
  Example17Result result;
  result.M1 = params.M1 ? *params.M1 : integrate_beta(params.beta);
  const double growth = std::exp(2.0 * result.M1);
  double max_x0 = 0.0;
  for (const auto& ic : init) max_x0 = std::max(max_x0, norm(ic.x0));
  const double radius = std::max(3.0, 2.0 * max_x0 * std::exp(result.M1));
  const LoadedConfig cfg = make_example17(params, radius);
  const SystemDef& sys = cfg.system;
  const Certificate& cert = *cfg.certificate;
  const std::vector<double> none;
  const QuadResult beta_tail = gauss_kronrod(
      [&](double t) { return params.beta.evaluate(t, none); }, T_max,
      std::numeric_limits<double>::infinity(), 1e-15, 1e-10);

  result.entries.resize(init.size());
  parallel_for(init.size(), threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> x(static_cast<std::size_t>(sys.n));
    for (std::size_t k = b; k < e; ++k) {
      Example17Entry& en = result.entries[k];
      en.ic = init[k];
      const double r0sq = [&] {
        double s = 0.0;
        for (double v : en.ic.x0) s += v * v;
        return s;
      }();
      en.bound_norm_sq = r0sq * growth;
      en.budget = result.M1 * r0sq * growth;
      try {
        const Trajectory traj = integrate(sys, en.ic.x0, en.ic.t0, T_max, integrate_opts);
        if (traj.status() != TrajectoryStatus::kCompleted) {
          en.status = VerdictStatus::kInconclusive;
          en.notes = std::string("trajectory ") + to_string(traj.status());
          continue;
        }
        for (double t : traj.scan_times(16)) {
          traj.sample_into(t, x);
          double s = 0.0;
          for (double v : x) s += v * v;
          en.sup_norm_sq = std::max(en.sup_norm_sq, s);
          const auto fx = sys.rhs(t, x);
          const double vdot = cert.V.directional(EvalPoint{t, x}, 1.0, fx);
          en.max_residual = std::max(
              en.max_residual, std::fabs(vdot - std::max(cert.Wstar(t, x), 0.0)));
        }
        const QuadResult q = path_integral(
            traj, [&](double t, std::span<const double> xs) {
              return std::max(cert.Wstar(t, xs), 0.0);
            });
        en.integral = q.value;
        en.quad_error = q.error;
        en.tail = r0sq * growth * beta_tail.value;
        std::string failed;
        if (en.sup_norm_sq > en.bound_norm_sq * (1.0 + 1e-6)) failed = "trajectory bound";
        if (en.integral + en.tail > en.budget * (1.0 + 1e-6)) failed = "integral budget";
        if (en.max_residual > 1e-9) failed = "dissipation identity";
        en.status = failed.empty() ? VerdictStatus::kPass : VerdictStatus::kFail;
        en.notes = failed;
      } catch (const std::exception& ex) {
        en.status = VerdictStatus::kInconclusive;
        en.notes = ex.what();
      }
    }
  });

  Verdict& v = result.verdict;
  v.check = "example17 bounds: |x|^2 <= |x0|^2 e^{2M1}, budget, V' = max{W*,0}";
  v.samples = init.size();
  std::size_t passes = 0;
  double max_residual = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  std::size_t counted = 0;
  for (const auto& en : result.entries) {
    max_residual = std::max(max_residual, en.max_residual);
    if (en.status == VerdictStatus::kPass) ++passes;
    if (en.status == VerdictStatus::kFail && v.status != VerdictStatus::kFail) {
      v.status = VerdictStatus::kFail;
      if (en.notes == "trajectory bound") {
        v.witness = Witness{en.ic.t0, en.ic.x0, en.sup_norm_sq,
                            en.bound_norm_sq, "sup |x(t)|^2 <= |x0|^2 e^{2M1}"};
      } else if (en.notes == "integral budget") {
        v.witness = Witness{en.ic.t0, en.ic.x0, en.integral + en.tail, en.budget,
                            "integral max{W*,0} <= M1 |x0|^2 e^{2M1}"};
      } else {
        v.witness = Witness{en.ic.t0, en.ic.x0, en.max_residual, 1e-9,
                            "|V' - max{W*,0}| <= 1e-9"};
      }
    }
    if (en.status != VerdictStatus::kInconclusive) {
      const double slack = en.budget - en.integral - en.tail;
      lo = std::min(lo, slack);
      hi = std::max(hi, slack);
      sum += slack;
      ++counted;
    }
  }
  if (counted > 0) {
    v.margin_min = lo;
    v.margin_max = hi;
    v.margin_mean = sum / static_cast<double>(counted);
  }
  if (v.status != VerdictStatus::kFail && passes == 0) {
    v.status = VerdictStatus::kInconclusive;
  }
  v.notes = "M1 = " + std::to_string(result.M1) +
            "; max |V' - max{W*,0}| = " + std::to_string(max_residual);
  return result;
}

}  // namespace nastab
