#include "nastab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nastab/quadrature.hpp"

namespace nastab {

const char* to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::kPass: return "pass";
    case VerdictStatus::kFail: return "fail";
    case VerdictStatus::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

bool violates(double lhs, double rhs) {
  if (std::isnan(lhs) || std::isnan(rhs)) return true;
  const double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
  return lhs - rhs > 1e-12 * scale;
}

namespace {

constexpr const char* kResolutionNote =
    "sampling-based: a pass means no counterexample at the sampled "
    "resolution, not a proof";

struct PointOutcome {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // enters the margin statistics
  const char* inequality = "";
  bool violated = false;
  bool error = false;
  std::string error_message;
};

using PointCheck =
    std::function<PointOutcome(double, std::span<const double>)>;

// Evaluates `check` at every sample and reduces in sample order, so the
// verdict does not depend on the worker count.
Verdict sweep(const std::string& name, const SampleSet& samples,
              unsigned threads, const PointCheck& check) {
  std::vector<PointOutcome> outcomes(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        outcomes[i] = check(samples.t[i], samples.state(i));
      } catch (const std::exception& e) {
        outcomes[i].error = true;
        outcomes[i].error_message = e.what();
      }
    }
  });

  Verdict v;
  v.check = name;
  v.samples = samples.size();
  v.notes = kResolutionNote;
  std::optional<std::size_t> first_fail, first_error;
  double sum = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t counted = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    if (o.error) {
      if (!first_error) first_error = i;
      continue;
    }
    if (o.violated && !first_fail) first_fail = i;
    sum += o.slack;
    lo = std::min(lo, o.slack);
    hi = std::max(hi, o.slack);
    ++counted;
  }
  if (counted > 0) {
    v.margin_min = lo;
    v.margin_max = hi;
    v.margin_mean = sum / static_cast<double>(counted);
  }
  auto witness_at = [&](std::size_t i) {
    const auto x = samples.state(i);
    return Witness{samples.t[i], {x.begin(), x.end()}, outcomes[i].lhs,
                   outcomes[i].rhs, outcomes[i].inequality};
  };
  if (first_fail) {
    v.status = VerdictStatus::kFail;
    v.witness = witness_at(*first_fail);
  } else if (first_error) {
    v.status = VerdictStatus::kInconclusive;
    v.witness = witness_at(*first_error);
    v.witness->inequality = "evaluation error";
    v.notes = outcomes[*first_error].error_message + "; " + v.notes;
  } else if (samples.size() == 0) {
    v.status = VerdictStatus::kInconclusive;
    v.notes = "no sample points; " + v.notes;
  }
  return v;
}

std::optional<Verdict> check_origin(const std::string& name,
                                    const std::vector<std::pair<const char*, const Expression*>>& fns,
                                    int n) {
  const std::vector<double> zero(static_cast<std::size_t>(n), 0.0);
  for (const auto& [label, e] : fns) {
    const double v = e->evaluate(0.0, zero);
    if (std::fabs(v) > 1e-12) {
      Verdict out;
      out.check = name;
      out.status = VerdictStatus::kFail;
      out.witness = Witness{0.0, zero, v, 0.0, std::string(label) + "(0) = 0"};
      out.notes = std::string(label) + " does not vanish at the origin";
      return out;
    }
  }
  return std::nullopt;
}

PointOutcome compare(double lhs, double rhs, const char* inequality) {
  PointOutcome o;
  o.lhs = lhs;
  o.rhs = rhs;
  o.slack = rhs - lhs;
  o.inequality = inequality;
  o.violated = violates(lhs, rhs);
  return o;
}

PointOutcome positive(double value, const char* inequality) {
  PointOutcome o;
  o.lhs = 0.0;
  o.rhs = value;
  o.inequality = inequality;
  o.violated = !(value > 0.0);
  return o;
}

}  // namespace

Verdict check_sandwich(const Certificate& cert, const SystemDef& sys,
                       const SamplingPlan& plan) {
  const std::string name = "sandwich V1 <= V <= V2";
  if (auto bad = check_origin(name, {{"V1", &cert.V1}, {"V2", &cert.V2}}, sys.n)) {
    return *bad;
  }
  const SampleSet samples = sample_time_state(plan, sys.n, sys.domain_radius);
  return sweep(name, samples, plan.threads,
               [&](double t, std::span<const double> x) {
                 const double v1 = cert.V1.evaluate(t, x);
                 const double v = cert.V.evaluate(t, x);
                 const double v2 = cert.V2.evaluate(t, x);
                 PointOutcome lower = compare(v1, v, "V1(x) <= V(t,x)");
                 PointOutcome upper = compare(v, v2, "V(t,x) <= V2(x)");
                 PointOutcome p1 = positive(v1, "V1(x) > 0");
                 PointOutcome p2 = positive(v2, "V2(x) > 0");
                 const double slack = std::min(lower.slack, upper.slack);
                 for (PointOutcome* o : {&lower, &upper, &p1, &p2}) {
                   if (o->violated) {
                     o->slack = slack;
                     return *o;
                   }
                 }
                 lower.slack = slack;
                 return lower;
               });
}

Verdict check_decay(const Certificate& cert, const SystemDef& sys,
                    const SamplingPlan& plan) {
  const bool strict = cert.mode != CertificateMode::kUniform;
  if (strict && !cert.V3) {
    throw std::invalid_argument("mode " + to_string(cert.mode) +
                                " requires V3");
  }
  const std::string name =
      strict ? "decay dV/dt - max{W*,0} <= -V3(x)"
             : "decay dV/dt - max{W*,0} <= 0";
  if (strict) {
    const std::vector<double> zero(static_cast<std::size_t>(sys.n), 0.0);
    const double v30 = (*cert.V3)(0.0, zero);
    if (std::fabs(v30) > 1e-12) {
      Verdict out;
      out.check = name;
      out.status = VerdictStatus::kFail;
      out.witness = Witness{0.0, zero, v30, 0.0, "V3(0) = 0"};
      return out;
    }
  }
  const SampleSet samples = sample_time_state(plan, sys.n, sys.domain_radius);
  const auto un = static_cast<std::size_t>(sys.n);
  Verdict v = sweep(name, samples, plan.threads,
                    [&](double t, std::span<const double> x) {
                      std::vector<double> fx(un);
                      sys.rhs(t, x, fx);
                      const double vdot =
                          cert.V.directional(EvalPoint{t, x}, 1.0, fx);
                      const double lhs = vdot - std::max(cert.Wstar(t, x), 0.0);
                      if (!strict) {
                        return compare(lhs, 0.0, "dV/dt - max{W*,0} <= 0");
                      }
                      const double v3 = (*cert.V3)(t, x);
                      PointOutcome o =
                          compare(lhs, -v3, "dV/dt - max{W*,0} <= -V3(x)");
                      if (!o.violated && !(v3 > 0.0)) {
                        PointOutcome p = positive(v3, "V3(x) > 0");
                        p.slack = o.slack;
                        return p;
                      }
                      return o;
                    });
  return v;
}

Verdict check_radially_unbounded(const Certificate& cert, const SystemDef& sys,
                                 std::size_t directions) {
  Verdict v;
  v.check = "radial unboundedness of V1";
  const auto dirs = sphere_directions(
      sys.n, directions ? directions : default_direction_count(sys.n));
  std::vector<double> x(static_cast<std::size_t>(sys.n));
  double previous = -std::numeric_limits<double>::infinity();
  double at_one = 0.0;
  for (int k = 0; k <= 6; ++k) {
    const double r = std::pow(10.0, k);
    double lowest = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = r * dirs[d][i];
      const double value = cert.V1.evaluate(0.0, x);
      if (value < lowest) {
        lowest = value;
        arg = d;
      }
      ++v.samples;
    }
    if (k == 0) at_one = lowest;
    if (!(lowest > previous)) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = r * dirs[arg][i];
      v.status = VerdictStatus::kFail;
      v.witness = Witness{0.0, x, previous, lowest,
                          "min V1 on |x| = r increases with r"};
      v.notes = "V1 stops growing along a ray";
      return v;
    }
    previous = lowest;
  }
  if (!(previous >= 100.0 * at_one)) {
    v.status = VerdictStatus::kFail;
    v.witness = Witness{0.0, x, 100.0 * at_one, previous,
                        "min V1 on |x| = 1e6 >= 100 min V1 on |x| = 1"};
    v.notes = "V1 appears bounded";
    return v;
  }
  v.margin_min = previous;
  v.margin_mean = previous;
  v.margin_max = previous;
  v.notes =
      "checked on radii 1e0..1e6 only; the domain ball itself is bounded, so "
      "global claims are out of empirical reach";
  return v;
}

std::vector<InitialCondition> sample_initial_conditions(
    int n, double radius, std::span<const double> t0s, std::size_t per_t0,
    std::uint64_t seed) {
  SamplingPlan plan;
  plan.samples = per_t0;
  plan.seed = seed;
  plan.exclusion_radius = 0.0;
  plan.T_check = 1.0;
  const SampleSet pts = sample_time_state(plan, n, radius);
  std::vector<InitialCondition> out;
  for (double t0 : t0s) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto x = pts.state(i);
      out.push_back({t0, {x.begin(), x.end()}});
    }
  }
  return out;
}

BudgetResult check_integral_budget(const Certificate& cert,
                                   const SystemDef& sys,
                                   const std::vector<InitialCondition>& init,
                                   const BudgetOptions& opts) {
  BudgetResult result;
  result.entries.resize(init.size());
  auto positive_part = [&](double t, std::span<const double> x) {
    return std::max(cert.Wstar(t, x), 0.0);
  };
  std::optional<QuadResult> tail_integral;
  if (cert.tail) {
    const std::vector<double> none;
    tail_integral = gauss_kronrod(
        [&](double t) { return cert.tail->rate.evaluate(t, none); }, opts.T_max,
        std::numeric_limits<double>::infinity(), 1e-15, 1e-10);
  }

  parallel_for(init.size(), opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      BudgetEntry& e = result.entries[k];
      e.ic = init[k];
      try {
        e.budget = cert.M.evaluate(0.0, e.ic.x0);
        if (!(opts.T_max > e.ic.t0)) {
          e.status = VerdictStatus::kInconclusive;
          e.notes = "T_max does not exceed t0";
          continue;
        }
        const Trajectory traj =
            integrate(sys, e.ic.x0, e.ic.t0, opts.T_max, opts.integrate);
        e.trajectory = traj.status();
        const QuadResult q = path_integral(traj, positive_part);
        e.used = q.value;
        e.quad_error = q.error;
        const double slack_budget = e.budget + 1e-6 * std::fabs(e.budget) + 1e-12;
        if (traj.status() != TrajectoryStatus::kCompleted) {
          // The integrand is nonnegative, so a partial integral is a lower
          // bound on the full one.
          if (e.used > slack_budget) {
            e.status = VerdictStatus::kFail;
            e.notes = "partial integral before leaving the domain already exceeds M(x0)";
          } else {
            e.status = VerdictStatus::kInconclusive;
            e.notes = std::string("trajectory ") + to_string(traj.status()) +
                      " at t = " + std::to_string(traj.tf());
          }
          continue;
        }
        if (tail_integral) {
          e.tail = cert.tail->scale.evaluate(0.0, e.ic.x0) * tail_integral->value;
        } else {
          e.notes = "no tail model: integral truncated at T_max";
        }
        const double total = e.used + e.tail.value_or(0.0);
        e.status = total > slack_budget ? VerdictStatus::kFail
                                        : VerdictStatus::kPass;
      } catch (const std::exception& ex) {
        e.status = VerdictStatus::kInconclusive;
        e.notes = ex.what();
      }
    }
  });

  Verdict& v = result.verdict;
  v.check = "integral budget int max{W*,0} <= M(x0)";
  v.samples = init.size();
  std::size_t passes = 0, inconclusive = 0;
  double sum = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t counted = 0;
  for (const auto& e : result.entries) {
    const double total = e.used + e.tail.value_or(0.0);
    if (e.status == VerdictStatus::kInconclusive) {
      ++inconclusive;
    } else {
      const double slack = e.budget - total;
      sum += slack;
      lo = std::min(lo, slack);
      hi = std::max(hi, slack);
      ++counted;
      if (e.budget > 0.0) {
        result.worst_ratio = std::max(result.worst_ratio, total / e.budget);
      } else if (total > 0.0) {
        result.worst_ratio = std::numeric_limits<double>::infinity();
      }
    }
    if (e.status == VerdictStatus::kPass) ++passes;
    if (e.status == VerdictStatus::kFail && !v.witness) {
      v.status = VerdictStatus::kFail;
      v.witness = Witness{e.ic.t0, e.ic.x0, total, e.budget,
                          "integral of max{W*,0} over [t0, T_max] + tail <= M(x0)"};
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
  v.notes = "integrated from t0 to T_max = " + std::to_string(opts.T_max) +
            (cert.tail ? " plus tail bound" : " without tail bound") +
            "; integration starts at each t0 rather than at 0; " +
            std::to_string(inconclusive) + " initial condition(s) inconclusive";
  return result;
}

}  // namespace nastab
