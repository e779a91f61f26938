#pragma once

#include <span>
#include <string>
#include <vector>

#include "clwe/instance.hpp"

namespace clwe {

// The planted classifier: a degree-4d PTF whose roots sit halfway between
// the 2d central negative-phase pancake intervals and their positive-phase
// neighbors. Sign evaluation is by root counting, which stays exact at
// degrees where the expanded polynomial would over/underflow.

struct IntervalFamily {
  double gamma = 0.0;
  double out_beta = 0.0;
  double alpha = 0.0;
  bool default_alpha = false;
  long k_min = 0;  // certified index range covering all but <= eps_tail mass
  long k_max = 0;

  // Pair geometry of the c=0 / c=1/2 mixture described by `params`.
  static IntervalFamily build(const MixtureParams& params, double eps_tail = 1e-16);
  static IntervalFamily build(double gamma, double out_beta, double alpha, double eps_tail = 1e-16);

  double s2() const { return out_beta * out_beta + gamma * gamma; }
  double center_plus(long k) const { return gamma * static_cast<double>(k) / s2(); }
  double center_minus(long k) const { return center_plus(k) - 0.5 / gamma; }
  // Minimum distance between a positive and a negative interval center.
  double gap() const { return gamma / s2() - 0.5 / gamma; }

  // Supports of the two families are disjoint iff gap > 2 alpha. With the
  // default radius this reduces algebraically to 5 out_beta^2 < 3 gamma^2,
  // which is the form evaluated here (the reduced form is exact at the
  // boundary, where gap - 2 alpha itself rounds to a sign flip away).
  bool disjoint() const;
};

enum class RegionClass { always_correct, always_wrong, off_support };

struct OraclePTF {
  std::vector<double> w;      // hidden direction
  std::vector<double> roots;  // 4d roots, strictly increasing
  int d = 0;
  IntervalFamily family;

  int degree() const { return 4 * d; }

  // Sign of the monic polynomial with these roots at t: +1 iff the number of
  // roots strictly below t is even. Ties (t exactly a root) give +1.
  int classify_projection(double t) const;
  int classify(std::span<const double> x) const;

  std::string to_json() const;
  static OraclePTF from_json(const std::string& text);
};

// Builds the oracle for the 2d protected intervals k in {-d+1, ..., d}.
OraclePTF build_oracle(const IntervalFamily& family, std::vector<double> w, int d);

// Monic expansion of prod (t - r_i), ascending powers, long double
// accumulation. Intended for the LTF lift and cross-checks at small d.
std::vector<double> ptf_coefficients(const OraclePTF& oracle);

// Weight vector W with sign(<W, phi(x)>) = classify(x), where phi is the
// monomial embedding of `spec`. Requires spec.degree >= 4d.
std::vector<double> ltf_weights(const OraclePTF& oracle, const EmbeddingSpec& spec);

// Exact misclassification probability of the oracle on the labeled mixture:
// half the D_- component mass outside the protected index range,
// (1/2) [sum_{k <= -d} + sum_{k >= d+1}] rho_s(k) / rho_s(Z).
double oracle_error_exact(const MixtureParams& params, int d);

// Region predicate behind the {0,1} conditional-error claim: positive bands
// and protected negative bands are always correct, unprotected negative
// bands always wrong, everything else off-support.
RegionClass conditional_error_class(const OraclePTF& oracle, std::span<const double> x);

}  // namespace clwe
