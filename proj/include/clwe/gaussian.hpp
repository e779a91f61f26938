#pragma once

#include <span>
#include <vector>

#include "clwe/rng.hpp"

namespace clwe {

// Gaussian mass function rho_s(x) = exp(-pi ||x/s||^2) and friends.
//
// Everything in this library uses the mass-function width s, under which
// rho_s/s^n is the density of a centered Gaussian with per-coordinate
// variance s^2/(2 pi). Width::sigma() is the only place the factor
// sqrt(2 pi) appears; use it instead of inlining the conversion.

// Width parameter s of rho_s. Strictly positive and finite.
struct Width {
  double s;

  explicit Width(double width);

  // Standard deviation s / sqrt(2 pi) of the corresponding Gaussian.
  double sigma() const noexcept;
  static Width from_sigma(double sigma);
};

// rho_s at a scalar or vector argument. Throws std::domain_error on
// non-finite input. Value in (0, 1].
double rho(Width s, double x);
double rho(Width s, std::span<const double> x);

// Cutoff K for integer theta sums with certified neglected mass:
// sum_{|k|>K} rho_s(k) <= eps_tail, via the tail bound 2 exp(-pi K^2/s^2).
struct TailCutoff {
  int k_max;
  double eps_tail;

  static TailCutoff certify(Width s, double eps_tail = 1e-16);
};

// Theta sum rho_s(Z) = sum_k exp(-pi k^2 / s^2), truncated at the certified
// cutoff. Terms are accumulated smallest to largest.
double theta_mass(Width s, const TailCutoff& cutoff);
double theta_mass(Width s);

// Discrete Gaussian D_{Z,s}: mass proportional to rho_s(k) on the integers.
// Sampling is by inverse CDF over the certified support [-K, K].
class DiscreteGaussian {
 public:
  explicit DiscreteGaussian(Width s, double eps_tail = 1e-16);

  int sample(RandomStream& rng) const;
  // rho_s(k) / rho_s(Z).
  double prob(int k) const;
  // P(|U| >= d) for U ~ D_{Z,s}, exact up to the certified truncation.
  // Always <= 2 exp(-pi d^2 / s^2).
  double two_sided_tail(int d) const;
  // sum_{k >= d} rho_s(k) / rho_s(Z) for d >= 1.
  double upper_tail(int d) const;

  double mass() const noexcept { return mass_; }
  int k_max() const noexcept { return cutoff_.k_max; }
  Width width() const noexcept { return s_; }

 private:
  Width s_;
  TailCutoff cutoff_;
  double mass_;
  std::vector<double> cdf_;  // unnormalized cumulative mass over [-K, K]
};

double discrete_gaussian_two_sided_tail(Width s, int d);

// One-dimensional rho_s(.; c) truncated to |x - c| <= radius and rescaled so
// its integral over the support equals the untruncated mass s. `normalizer`
// is the ratio of full to truncated mass, always >= 1.
struct TruncatedGaussian {
  double center;
  Width width;
  double radius;
  double normalizer;

  static TruncatedGaussian make(double center, Width width, double radius);

  double density(double x) const;
  double sample(RandomStream& rng) const;
};

// Decomposition rho_{r1}(x - c1) rho_{r2}(x - c2)
//   = rho_{r0}(c1 - c2) rho_{r3}(x - c3).
struct GaussianProductParts {
  Width r0;
  Width r3;
  std::vector<double> c3;
};

GaussianProductParts gaussian_product_decompose(Width r1, std::span<const double> c1,
                                                Width r2, std::span<const double> c2);

// Relative residual |rho_s(Z) - s rho_{1/s}(Z)| / rho_s(Z) of the Poisson
// summation identity specialized to f = rho_s, L = Z.
double poisson_residual(Width s);

}  // namespace clwe
