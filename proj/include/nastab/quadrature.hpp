#pragma once

#include <functional>

namespace nastab {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod on [a, b]. Panels with the
/// largest |K15 - G7| are bisected until the summed estimate meets
/// max(abs_tol, rel_tol * |value|). `b` may be +infinity.
QuadResult gauss_kronrod(const std::function<double(double)>& g, double a,
                         double b, double abs_tol = 1e-12,
                         double rel_tol = 1e-12, unsigned max_depth = 100);

}  // namespace nastab
