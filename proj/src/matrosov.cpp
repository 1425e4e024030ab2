#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nastab/certify.hpp"

namespace nastab {
namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

bool in_annulus(const MatrosovData& md, std::span<const double> x) {
  const double r = norm(x);
  return r > md.alpha && r < md.A;
}

}  // namespace

double derivative_along(const Expression& W, const SystemDef& sys, double t,
                        std::span<const double> x) {
  const std::vector<double> fx = sys.rhs(t, x);
  return W.directional(EvalPoint{t, x}, 1.0, fx);
}

ZeroSetDistance::ZeroSetDistance(const MatrosovData& md, const SystemDef& sys,
                                 double half_width, std::uint64_t seed)
    : md_(md), n_(sys.n) {
  if (md_.E_distance) return;
  const auto un = static_cast<std::size_t>(n_);
  const std::size_t target = n_ <= 2 ? 4096 : 2048 * un;
  SobolStream stream(un, seed + 17);
  std::vector<double> u(un), y(un);
  for (std::size_t k = 0; k < 4 * target && cloud_.size() < target * un; ++k) {
    stream.next(u);
    for (std::size_t i = 0; i < un; ++i) y[i] = half_width * (2.0 * u[i] - 1.0);
    if (project(y) && norm(y) <= 1.5 * half_width * std::sqrt(double(n_))) {
      cloud_.insert(cloud_.end(), y.begin(), y.end());
    }
  }
}

// Newton-type projection onto {V* = 0}: y -= V*(y) grad / |grad|^2.
bool ZeroSetDistance::project(std::span<double> y) const {
  for (int it = 0; it < 200; ++it) {
    const double v = md_.Vstar.evaluate(0.0, y);
    if (std::fabs(v) <= md_.zero_tol) return true;
    const Gradient g = md_.Vstar.gradient(EvalPoint{0.0, y});
    double g2 = 0.0;
    for (double d : g.dx) g2 += d * d;
    if (!(g2 > 0.0) || !std::isfinite(g2)) return false;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= v * g.dx[i] / g2;
  }
  return false;
}

double ZeroSetDistance::operator()(std::span<const double> x) const {
  if (md_.E_distance) return md_.E_distance->evaluate(0.0, x);
  if (std::fabs(md_.Vstar.evaluate(0.0, x)) <= md_.zero_tol) return 0.0;
  const auto un = static_cast<std::size_t>(n_);
  const std::size_t count = cloud_size();
  if (count == 0) return std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) {
    const double d = distance(x, std::span<const double>(cloud_.data() + k * un, un));
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  // Projected descent: pull the nearest point toward x, project back.
  std::vector<double> y(cloud_.begin() + static_cast<std::ptrdiff_t>(best * un),
                        cloud_.begin() + static_cast<std::ptrdiff_t>((best + 1) * un));
  std::vector<double> trial(un);
  double step = 1.0;
  for (int it = 0; it < 60 && step > 1e-6; ++it) {
    for (std::size_t i = 0; i < un; ++i) trial[i] = y[i] + step * (x[i] - y[i]);
    if (project(trial)) {
      const double d = distance(x, trial);
      if (d < best_d) {
        best_d = d;
        y = trial;
        continue;
      }
    }
    step *= 0.5;
  }
  return best_d;
}

DefinitenessEstimate matrosov_definiteness(const MatrosovData& md,
                                           const SystemDef& sys,
                                           const SamplingPlan& plan) {
  if (!(md.alpha > 0.0) || !(md.alpha < md.A)) {
    throw std::invalid_argument("definiteness probe requires 0 < alpha < A");
  }
  if (!(md.r1 > 0.0)) throw std::invalid_argument("definiteness probe requires r1 > 0");

  DefinitenessEstimate est;
  est.r1 = md.r1;
  est.alpha = md.alpha;
  est.A = md.A;
  const ZeroSetDistance dist(md, sys, md.A, plan.seed);
  auto in_probe = [&](std::span<const double> x) {
    return in_annulus(md, x) && dist(x) < md.r1;
  };
  const SampleSet probes =
      sample_region(plan, sys.n, md.A, plan.samples, in_probe);
  est.probe_samples = probes.size();
  if (probes.size() == 0) {
    est.status = VerdictStatus::kInconclusive;
    est.notes = "probe set empty under sampling";
    return est;
  }

  std::vector<double> wdot(probes.size()), wabs(probes.size()), rho(probes.size());
  parallel_for(probes.size(), plan.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto x = probes.state(i);
      wdot[i] = std::fabs(derivative_along(md.W, sys, probes.t[i], x));
      wabs[i] = std::fabs(md.W.evaluate(probes.t[i], x));
      rho[i] = dist(x);
    }
  });
  est.L_hat = *std::max_element(wabs.begin(), wabs.end());

  // Local pattern search from the lowest probes, staying inside the probe
  // set, so the estimate is not limited by the sampling density.
  std::vector<std::size_t> order(probes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return wdot[a] < wdot[b]; });
  const auto un = static_cast<std::size_t>(sys.n);
  est.xi_hat = wdot[order[0]];
  est.min_t = probes.t[order[0]];
  {
    const auto x = probes.state(order[0]);
    est.min_x.assign(x.begin(), x.end());
  }
  const std::size_t starts = std::min<std::size_t>(5, order.size());
  for (std::size_t s = 0; s < starts; ++s) {
    double t = probes.t[order[s]];
    const auto x0 = probes.state(order[s]);
    std::vector<double> x(x0.begin(), x0.end()), trial(un);
    double value = wdot[order[s]];
    double t_step = plan.T_check / 100.0;
    double x_step = md.r1 / 4.0;
    for (int it = 0; it < 400 && x_step > 1e-12; ++it) {
      bool improved = false;
      for (std::size_t coord = 0; coord <= un && !improved; ++coord) {
        for (double sign : {1.0, -1.0}) {
          double tt = t;
          trial = x;
          if (coord == un) {
            tt = std::clamp(t + sign * t_step, 0.0, plan.T_check);
          } else {
            trial[coord] += sign * x_step;
          }
          if (!in_probe(trial)) continue;
          const double w = std::fabs(derivative_along(md.W, sys, tt, trial));
          if (w < value) {
            value = w;
            t = tt;
            x = trial;
            improved = true;
            break;
          }
        }
      }
      if (!improved) {
        t_step *= 0.5;
        x_step *= 0.5;
      }
    }
    if (value < est.xi_hat) {
      est.xi_hat = value;
      est.min_t = t;
      est.min_x = x;
    }
  }

  if (md.xi) {
    std::vector<std::size_t> by_rho(probes.size());
    std::iota(by_rho.begin(), by_rho.end(), std::size_t{0});
    std::stable_sort(by_rho.begin(), by_rho.end(),
                     [&](std::size_t a, std::size_t b) { return rho[a] < rho[b]; });
    est.r1_max = md.r1;
    for (std::size_t i : by_rho) {
      if (wdot[i] < *md.xi) {
        est.r1_max = rho[i];
        break;
      }
    }
  }

  if (est.xi_hat > 1e-12) {
    est.status = VerdictStatus::kPass;
    est.notes = "xi_hat is the minimum over " + std::to_string(probes.size()) +
                " probe samples refined by local search";
  } else {
    est.status = VerdictStatus::kFail;
    est.notes = "dW/dt vanishes in the probe set: W' is not definitely nonzero";
  }
  if (!dist.exact()) {
    est.notes += "; distance to E approximated from " +
                 std::to_string(dist.cloud_size()) + " projected points";
  }
  return est;
}

Certificate matrosov_construct(const MatrosovData& md, const SystemDef& sys,
                               const Certificate& base, double xi,
                               const Expression& budget, double T_check) {
  Certificate cert;
  cert.V = base.V;
  cert.V1 = base.V1;
  cert.V2 = base.V2;
  cert.M = budget;
  cert.mode = CertificateMode::kUniformAsymptotic;
  const double tol = md.zero_tol;
  const Expression W = md.W;
  const Expression Vstar = md.Vstar;
  const SystemDef system = sys;

  cert.Wstar = ScalarField(
      [=](double t, std::span<const double> x) {
        if (std::fabs(Vstar.evaluate(t, x)) > tol) return 0.0;
        return std::fabs(derivative_along(W, system, t, x));
      },
      "|dW/dt| where |V*(x)| <= " + std::to_string(tol) + ", else 0", true);

  constexpr int kGrid = 101;
  cert.V3 = ScalarField(
      [=](double, std::span<const double> x) {
        const double vs = Vstar.evaluate(0.0, x);
        if (vs < -tol) return -vs;
        double lowest = xi;
        for (int k = 0; k < kGrid; ++k) {
          const double t = T_check * k / (kGrid - 1);
          lowest = std::min(lowest, std::fabs(derivative_along(W, system, t, x)));
        }
        return 0.5 * lowest;
      },
      "-V*(x) where V*(x) < -" + std::to_string(tol) +
          ", else min(xi, min_t |dW/dt|) / 2",
      false);
  return cert;
}

DwellResult dwell_bound_check(const MatrosovData& md, const SystemDef& sys,
                              const Expression& V,
                              const std::vector<Trajectory>& trajectories,
                              double xi, double L_region,
                              const ZeroSetDistance& dist) {
  if (!(xi > 0.0)) throw std::invalid_argument("dwell check requires xi > 0");
  DwellResult result;
  Verdict& v = result.verdict;
  v.check = "dwell time <= 2L/xi, finite entries, integral <= N 2L";
  v.samples = trajectories.size();
  const double sqrt_n = std::sqrt(static_cast<double>(sys.n));
  constexpr double kTimeTol = 1e-9;

  auto in_U = [&](double, std::span<const double> x) {
    return in_annulus(md, x) && dist(x) < md.r1;
  };
  auto wdot_abs = [&](double t, std::span<const double> x) {
    return std::fabs(derivative_along(md.W, sys, t, x));
  };

  std::size_t passes = 0;
  for (const auto& traj : trajectories) {
    DwellTrajectoryReport rep;
    rep.ic = {traj.t0(), {traj.x0().begin(), traj.x0().end()}};
    rep.trajectory = traj.status();

    double L_traj = 0.0;
    std::vector<double> x(static_cast<std::size_t>(sys.n));
    for (double t : traj.scan_times(16)) {
      traj.sample_into(t, x);
      if (!in_U(t, x)) continue;
      L_traj = std::max(L_traj, std::fabs(md.W.evaluate(t, x)));
      rep.X_hat = std::max(rep.X_hat, norm(sys.rhs(t, x)));
    }
    rep.L = std::max(L_region, L_traj);
    rep.dwell_bound = 2.0 * rep.L / xi;

    rep.dwells = detect_dwells(traj, in_U, wdot_abs).intervals;
    rep.N = rep.dwells.size();
    std::optional<Witness> witness;
    for (const auto& d : rep.dwells) {
      rep.max_dwell = std::max(rep.max_dwell, d.length());
      rep.integral_total += d.integral.value;
      if (!witness && d.length() > rep.dwell_bound + 2 * kTimeTol) {
        witness = Witness{d.enter, traj.sample(d.enter), d.length(),
                          rep.dwell_bound, "dwell length in U <= 2L/xi"};
      }
    }
    rep.integral_bound = static_cast<double>(rep.N) * 2.0 * rep.L;
    if (rep.X_hat > 0.0) rep.a_formula = xi * md.r1 / (2.0 * rep.X_hat * sqrt_n);

    if (rep.N >= 2) {
      double a_hat = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k + 1 < rep.N; ++k) {
        const double t_a = rep.dwells[k].enter;
        const double t_b = rep.dwells[k + 1].enter;
        a_hat = std::min(a_hat, V.evaluate(t_a, traj.sample(t_a)) -
                                    V.evaluate(t_b, traj.sample(t_b)));
      }
      rep.a_hat = a_hat;
      const double v0 = V.evaluate(traj.t0(), traj.x0());
      if (!(a_hat > 0.0)) {
        if (!witness) {
          witness = Witness{traj.t0(), rep.ic.x0, 0.0, a_hat,
                            "V decreases between consecutive entries into U"};
        }
      } else {
        rep.N_bound = static_cast<std::size_t>(std::floor(v0 / a_hat)) + 1;
        if (rep.N > *rep.N_bound && !witness) {
          witness = Witness{traj.t0(), rep.ic.x0, static_cast<double>(rep.N),
                            static_cast<double>(*rep.N_bound),
                            "entries N <= floor(V(t0,x0)/a_hat) + 1"};
        }
      }
    }
    if (!witness && rep.integral_total > rep.integral_bound + 1e-9) {
      witness = Witness{traj.t0(), rep.ic.x0, rep.integral_total,
                        rep.integral_bound,
                        "sum of integral |dW/dt| over dwells <= N 2L"};
    }

    if (witness) {
      rep.status = VerdictStatus::kFail;
      if (v.status != VerdictStatus::kFail) {
        v.status = VerdictStatus::kFail;
        v.witness = witness;
      }
    } else if (traj.status() != TrajectoryStatus::kCompleted) {
      rep.status = VerdictStatus::kInconclusive;
      rep.notes = std::string("trajectory ") + to_string(traj.status());
    } else {
      rep.status = VerdictStatus::kPass;
      ++passes;
    }
    const double slack = rep.dwell_bound - rep.max_dwell;
    v.margin_min = result.trajectories.empty() ? slack : std::min(v.margin_min, slack);
    v.margin_max = result.trajectories.empty() ? slack : std::max(v.margin_max, slack);
    v.margin_mean += slack;
    result.trajectories.push_back(std::move(rep));
  }
  if (!result.trajectories.empty()) {
    v.margin_mean /= static_cast<double>(result.trajectories.size());
  }
  if (v.status != VerdictStatus::kFail && passes == 0) {
    v.status = VerdictStatus::kInconclusive;
  }
  v.notes =
      "L is sup |W| over the probe region U; the per-interval bound 2L stands "
      "in for the class-K bound of the construction";
  return result;
}

}  // namespace nastab
