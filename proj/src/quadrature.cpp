#include "nastab/quadrature.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace nastab {
namespace {

struct Panel {
  double a;
  double b;
  double value;
  double error;
  unsigned depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// G7/K15 pair on [a, b]; error is |K15 - G7|.
Panel rule15(const std::function<double(double)>& g, double a, double b,
             unsigned depth) {
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  using Gauss = boost::math::quadrature::gauss<double, 7>;
  const auto& xk = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double f0 = g(mid);
  double kronrod = f0 * wk[0];
  double gauss = f0 * wg[0];
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double fsum = g(mid - half * xk[i]) + g(mid + half * xk[i]);
    kronrod += fsum * wk[i];
    if (i % 2 == 0) gauss += fsum * wg[i / 2];
  }
  kronrod *= half;
  gauss *= half;
  const double err = std::max(std::fabs(kronrod - gauss),
                              50.0 * std::numeric_limits<double>::epsilon() *
                                  std::fabs(kronrod));
  return {a, b, kronrod, err, depth};
}

constexpr std::size_t kMaxPanels = 20000;

QuadResult adaptive(const std::function<double(double)>& g, double a, double b,
                    double abs_tol, double rel_tol, unsigned max_depth) {
  std::priority_queue<Panel> panels;
  Panel first = rule15(g, a, b, 0);
  double value = first.value;
  double error = first.error;
  panels.push(first);
  while (!panels.empty()) {
    if (error <= std::max(abs_tol, rel_tol * std::fabs(value))) break;
    Panel worst = panels.top();
    if (worst.depth >= max_depth || panels.size() >= kMaxPanels) break;
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = rule15(g, worst.a, mid, worst.depth + 1);
    Panel right = rule15(g, mid, worst.b, worst.depth + 1);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  // Re-sum to avoid drift from the incremental updates.
  QuadResult r;
  while (!panels.empty()) {
    r.value += panels.top().value;
    r.error += panels.top().error;
    panels.pop();
  }
  return r;
}

}  // namespace

QuadResult gauss_kronrod(const std::function<double(double)>& g, double a,
                         double b, double abs_tol, double rel_tol,
                         unsigned max_depth) {
  if (a == b) return {};
  if (std::isinf(b)) {
    // t = a + s / (1 - s), s in [0, 1).
    auto mapped = [&](double s) {
      if (s >= 1.0) return 0.0;
      const double one_minus = 1.0 - s;
      return g(a + s / one_minus) / (one_minus * one_minus);
    };
    return adaptive(mapped, 0.0, 1.0, abs_tol, rel_tol, max_depth);
  }
  if (b < a) {
    QuadResult r = adaptive(g, b, a, abs_tol, rel_tol, max_depth);
    r.value = -r.value;
    return r;
  }
  return adaptive(g, a, b, abs_tol, rel_tol, max_depth);
}

}  // namespace nastab
