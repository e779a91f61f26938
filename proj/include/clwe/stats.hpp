#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace clwe::stats {

// Small statistical toolbox used by the harness and the test suites:
// chi-square goodness of fit, two-sample chi-square, one-sample
// Kolmogorov-Smirnov, and Wilson/Newcombe proportion intervals.

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

inline double chi_square_p_value(double statistic, int dof) {
  if (dof < 1) throw std::invalid_argument("chi_square_p_value: dof >= 1");
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

// Goodness of fit of observed counts against expected counts (same total).
inline ChiSquareResult chi_square_gof(std::span<const double> observed,
                                      std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.size() < 2) {
    throw std::invalid_argument("chi_square_gof: need matching bins, >= 2");
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) throw std::invalid_argument("chi_square_gof: expected count <= 0");
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  const int dof = static_cast<int>(observed.size()) - 1;
  return {stat, dof, chi_square_p_value(stat, dof)};
}

// Two-sample chi-square homogeneity test on binned counts.
inline ChiSquareResult chi_square_two_sample(std::span<const double> counts_a,
                                             std::span<const double> counts_b) {
  if (counts_a.size() != counts_b.size() || counts_a.size() < 2) {
    throw std::invalid_argument("chi_square_two_sample: need matching bins, >= 2");
  }
  double total_a = 0.0, total_b = 0.0;
  for (std::size_t i = 0; i < counts_a.size(); ++i) {
    total_a += counts_a[i];
    total_b += counts_b[i];
  }
  const double ka = std::sqrt(total_b / total_a);
  const double kb = std::sqrt(total_a / total_b);
  double stat = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < counts_a.size(); ++i) {
    const double n = counts_a[i] + counts_b[i];
    if (n == 0.0) continue;
    const double d = ka * counts_a[i] - kb * counts_b[i];
    stat += d * d / n;
    ++dof;
  }
  if (dof < 1) throw std::invalid_argument("chi_square_two_sample: all bins empty");
  return {stat, dof, chi_square_p_value(stat, dof)};
}

// Asymptotic Kolmogorov distribution Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 l^2}.
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample KS against a continuous CDF. `cdf` maps sample values to [0, 1].
template <typename Cdf>
KsResult ks_test(std::vector<double> samples, Cdf&& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  // Stephens' small-sample correction to the asymptotic distribution.
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  return {d, kolmogorov_q(lambda)};
}

inline double normal_cdf(double x, double mu = 0.0, double sigma = 1.0) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

inline double normal_quantile(double p, double mu = 0.0, double sigma = 1.0) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p in (0, 1)");
  return mu + sigma * std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
}

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959964) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: trials >= 1");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Newcombe score interval for a difference of proportions p_a - p_b.
inline Interval newcombe_diff_interval(std::uint64_t a, std::uint64_t na, std::uint64_t b,
                                       std::uint64_t nb, double z = 1.959964) {
  const Interval wa = wilson_interval(a, na, z);
  const Interval wb = wilson_interval(b, nb, z);
  const double pa = static_cast<double>(a) / static_cast<double>(na);
  const double pb = static_cast<double>(b) / static_cast<double>(nb);
  const double diff = pa - pb;
  const double low = diff - std::sqrt((pa - wa.low) * (pa - wa.low) + (wb.high - pb) * (wb.high - pb));
  const double high = diff + std::sqrt((wa.high - pa) * (wa.high - pa) + (pb - wb.low) * (pb - wb.low));
  return {low, high};
}

inline double binomial_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace clwe::stats
