#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace clwe::quad {

struct Result {
  double value = 0.0;
  double error_estimate = 0.0;
};

// Adaptive Gauss-Kronrod on a single smooth interval. The depth cap matters
// on near-zero-mass segments, where the relative target is unreachable and
// the rule would otherwise subdivide all the way down.
template <typename F>
Result integrate(F&& f, double a, double b, double tol = 1e-10, int max_depth = 12) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, max_depth, tol, &err);
  return {v, err};
}

// Integrate over [a, b] split at the given interior breakpoints. The pancake
// densities are only piecewise smooth (jumps at the truncation boundaries),
// which defeats a single adaptive pass. `tol` is the per-segment relative
// target, as in the underlying Gauss-Kronrod rule.
template <typename F>
Result integrate_segmented(F&& f, double a, double b, std::span<const double> breakpoints,
                           double tol = 1e-10) {
  if (!(a < b)) throw std::invalid_argument("integrate_segmented: a < b required");
  std::vector<double> edges;
  edges.push_back(a);
  for (double x : breakpoints) {
    if (x > a && x < b) edges.push_back(x);
  }
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  Result total;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (edges[i + 1] <= edges[i]) continue;
    const Result r = integrate(f, edges[i], edges[i + 1], tol);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
  }
  return total;
}

}  // namespace clwe::quad
