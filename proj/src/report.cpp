#include "nastab/report.hpp"

#include <cmath>
#include <cstdio>

namespace nastab {

using nlohmann::json;

namespace {

// JSON has no infinity; encode non-finite values as strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_vec(const std::vector<double>& x) {
  std::string s = "(";
  char buf[32];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", x[i]);
    s += buf;
  }
  return s + ")";
}

}  // namespace

json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"source", m.source},
          {"knobs", m.knobs},
          {"tool_version", kToolVersion},
          {"duration_s", m.duration_s}};
}

json to_json(const Witness& w) {
  json x = json::array();
  for (double v : w.x) x.push_back(num(v));
  return {{"t", num(w.t)},
          {"x", x},
          {"lhs", num(w.lhs)},
          {"rhs", num(w.rhs)},
          {"inequality", w.inequality}};
}

json to_json(const Verdict& v) {
  return {{"check", v.check},
          {"status", to_string(v.status)},
          {"witness", v.witness ? to_json(*v.witness) : json(nullptr)},
          {"margin_min", num(v.margin_min)},
          {"margin_mean", num(v.margin_mean)},
          {"margin_max", num(v.margin_max)},
          {"samples", v.samples},
          {"notes", v.notes}};
}

json to_json(const BudgetResult& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"t0", num(e.ic.t0)},
                       {"x0", e.ic.x0},
                       {"trajectory", to_string(e.trajectory)},
                       {"status", to_string(e.status)},
                       {"used", num(e.used)},
                       {"quad_error", num(e.quad_error)},
                       {"tail", e.tail ? num(*e.tail) : json(nullptr)},
                       {"budget", num(e.budget)},
                       {"notes", e.notes}});
  }
  return {{"verdict", to_json(r.verdict)},
          {"worst_ratio", num(r.worst_ratio)},
          {"entries", entries}};
}

json to_json(const DefinitenessEstimate& e) {
  return {{"status", to_string(e.status)},
          {"xi_hat", num(e.xi_hat)},
          {"alpha", num(e.alpha)},
          {"A", num(e.A)},
          {"r1", num(e.r1)},
          {"r1_max", e.r1_max ? num(*e.r1_max) : json(nullptr)},
          {"min_point", {{"t", num(e.min_t)}, {"x", e.min_x}}},
          {"L_hat", num(e.L_hat)},
          {"probe_samples", e.probe_samples},
          {"notes", e.notes}};
}

json to_json(const DwellResult& r) {
  json trajs = json::array();
  for (const auto& t : r.trajectories) {
    json dwells = json::array();
    for (const auto& d : t.dwells) {
      dwells.push_back({{"enter", num(d.enter)},
                        {"exit", num(d.exit)},
                        {"length", num(d.length())},
                        {"integral_abs_wdot", num(d.integral.value)}});
    }
    trajs.push_back(
        {{"t0", num(t.ic.t0)},
         {"x0", t.ic.x0},
         {"trajectory", to_string(t.trajectory)},
         {"status", to_string(t.status)},
         {"N", t.N},
         {"max_dwell", num(t.max_dwell)},
         {"dwell_bound", num(t.dwell_bound)},
         {"L", num(t.L)},
         {"a_hat", t.a_hat ? num(*t.a_hat) : json(nullptr)},
         {"N_bound", t.N_bound ? json(*t.N_bound) : json(nullptr)},
         {"integral_total", num(t.integral_total)},
         {"integral_bound", num(t.integral_bound)},
         {"X_hat", num(t.X_hat)},
         {"a_formula", t.a_formula ? num(*t.a_formula) : json(nullptr)},
         {"dwells", dwells},
         {"notes", t.notes}});
  }
  return {{"verdict", to_json(r.verdict)}, {"trajectories", trajs}};
}

json to_json(const StabilityReport& r) {
  json rows = json::array();
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    json per_t0 = json::array();
    for (const auto& d : r.delta[i]) {
      per_t0.push_back({{"t0", num(d.t0)},
                        {"delta", num(d.delta)},
                        {"witness_direction", d.witness_direction},
                        {"witness_radius", num(d.witness_radius)}});
    }
    rows.push_back({{"epsilon", num(r.epsilons[i])},
                    {"uniform_delta", num(r.uniform_delta[i])},
                    {"spread", num(r.spread[i])},
                    {"by_t0", per_t0}});
  }
  return {{"rows", rows},
          {"uniformly_stable", r.uniformly_stable},
          {"delta_nondecreasing", r.delta_nondecreasing},
          {"horizon", num(r.horizon)},
          {"directions", r.directions},
          {"trajectories", r.trajectories},
          {"notes", r.notes}};
}

json to_json(const SettlingTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"t0", num(r.t0)},
                    {"T", r.T ? num(*r.T) : json("not attained")},
                    {"worst_x0", r.worst_x0}});
  }
  return {{"eta", num(t.eta)},
          {"c", num(t.c)},
          {"rows", rows},
          {"uniform_T", t.uniform_T ? num(*t.uniform_T) : json("not attained")},
          {"spread", num(t.spread)},
          {"notes", t.notes}};
}

json to_json(const Example17Result& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"t0", num(e.ic.t0)},
                       {"x0", e.ic.x0},
                       {"status", to_string(e.status)},
                       {"sup_norm_sq", num(e.sup_norm_sq)},
                       {"bound_norm_sq", num(e.bound_norm_sq)},
                       {"integral", num(e.integral)},
                       {"quad_error", num(e.quad_error)},
                       {"tail", num(e.tail)},
                       {"budget", num(e.budget)},
                       {"max_residual", num(e.max_residual)},
                       {"notes", e.notes}});
  }
  return {{"verdict", to_json(r.verdict)}, {"M1", num(r.M1)}, {"entries", entries}};
}

void print_verdict(const Verdict& v, std::ostream& out) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "  [%s] %s (%zu samples, min slack %.3g)\n",
                to_string(v.status), v.check.c_str(), v.samples, v.margin_min);
  out << buf;
  if (v.witness) {
    const auto& w = *v.witness;
    const char* what = v.status == VerdictStatus::kFail ? "violated" : "at";
    out << "      " << what << ": " << w.inequality << "\n";
    std::snprintf(buf, sizeof buf, "      t = %.9g, x = ", w.t);
    out << buf << short_vec(w.x);
    std::snprintf(buf, sizeof buf, ", lhs = %.9g, rhs = %.9g\n", w.lhs, w.rhs);
    out << buf;
  }
  if (!v.notes.empty()) out << "      note: " << v.notes << "\n";
}

void write_delta_csv(const StabilityReport& r, std::ostream& out) {
  out << "epsilon,t0,delta\n";
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    for (const auto& d : r.delta[i]) {
      out << g17(d.epsilon) << ',' << g17(d.t0) << ',' << g17(d.delta) << '\n';
    }
  }
}

void write_settling_csv(const SettlingTable& t, std::ostream& out) {
  out << "eta,c,t0,T\n";
  for (const auto& r : t.rows) {
    out << g17(t.eta) << ',' << g17(t.c) << ',' << g17(r.t0) << ','
        << (r.T ? g17(*r.T) : std::string("nan")) << '\n';
  }
}

void write_delta_plot(const StabilityReport& r, std::ostream& out) {
  out << "# delta(epsilon) per initial time; plot with `index k`\n";
  for (std::size_t j = 0; j < r.t0s.size(); ++j) {
    out << "# t0 = " << g17(r.t0s[j]) << "\n# epsilon delta\n";
    for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
      out << g17(r.epsilons[i]) << ' ' << g17(r.delta[i][j].delta) << '\n';
    }
    out << "\n\n";
  }
  out << "# uniform delta = min over t0\n# epsilon delta\n";
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    out << g17(r.epsilons[i]) << ' ' << g17(r.uniform_delta[i]) << '\n';
  }
}

}  // namespace nastab
