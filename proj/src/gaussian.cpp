#include "clwe/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace clwe {

namespace {
constexpr double kPi = std::numbers::pi_v<double>;
constexpr double kSqrt2Pi = 2.5066282746310005024;
constexpr double kSqrtPi = 1.7724538509055160273;

double require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::domain_error(std::string(what) + " must be finite");
  return x;
}
}  // namespace

Width::Width(double width) : s(width) {
  if (!(std::isfinite(width) && width > 0.0)) {
    throw std::invalid_argument("Width: s must be positive and finite");
  }
}

double Width::sigma() const noexcept { return s / kSqrt2Pi; }

Width Width::from_sigma(double sigma) { return Width(sigma * kSqrt2Pi); }

double rho(Width s, double x) {
  require_finite(x, "rho: x");
  const double u = x / s.s;
  return std::exp(-kPi * u * u);
}

double rho(Width s, std::span<const double> x) {
  double q = 0.0;
  for (double xi : x) {
    require_finite(xi, "rho: x");
    const double u = xi / s.s;
    q += u * u;
  }
  return std::exp(-kPi * q);
}

TailCutoff TailCutoff::certify(Width s, double eps_tail) {
  if (!(eps_tail > 0.0 && eps_tail < 1.0)) {
    throw std::invalid_argument("TailCutoff: eps_tail must be in (0, 1)");
  }
  // 2 exp(-pi K^2/s^2) <= eps_tail needs K >= s sqrt(log(2/eps)/pi); the
  // comparison of the tail sum against that bound additionally needs
  // K >= s^2/(2 pi) (integral comparison step).
  const int k1 = static_cast<int>(std::ceil(s.s * std::sqrt(std::log(2.0 / eps_tail) / kPi))) + 1;
  const int k2 = static_cast<int>(std::ceil(s.s * s.s / (2.0 * kPi)));
  return TailCutoff{std::max({k1, k2, 1}), eps_tail};
}

double theta_mass(Width s, const TailCutoff& cutoff) {
  double acc = 0.0;
  for (int k = cutoff.k_max; k >= 1; --k) {
    acc += 2.0 * rho(s, static_cast<double>(k));
  }
  return acc + 1.0;
}

double theta_mass(Width s) { return theta_mass(s, TailCutoff::certify(s)); }

DiscreteGaussian::DiscreteGaussian(Width s, double eps_tail)
    : s_(s), cutoff_(TailCutoff::certify(s, eps_tail)) {
  const int k = cutoff_.k_max;
  cdf_.resize(2 * k + 1);
  double acc = 0.0;
  for (int i = 0; i < 2 * k + 1; ++i) {
    acc += rho(s_, static_cast<double>(i - k));
    cdf_[i] = acc;
  }
  mass_ = theta_mass(s_, cutoff_);
}

int DiscreteGaussian::sample(RandomStream& rng) const {
  const double u = rng.next_uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                            static_cast<std::ptrdiff_t>(cdf_.size()) - 1);
  return static_cast<int>(idx) - cutoff_.k_max;
}

double DiscreteGaussian::prob(int k) const { return rho(s_, static_cast<double>(k)) / mass_; }

double DiscreteGaussian::upper_tail(int d) const {
  if (d < 1) throw std::invalid_argument("DiscreteGaussian::upper_tail: d >= 1 required");
  double acc = 0.0;
  for (int k = cutoff_.k_max; k >= d; --k) {
    acc += rho(s_, static_cast<double>(k));
  }
  return acc / mass_;
}

double DiscreteGaussian::two_sided_tail(int d) const {
  if (d < 1) throw std::invalid_argument("DiscreteGaussian::two_sided_tail: d >= 1 required");
  if (d > cutoff_.k_max) return 0.0;
  return 2.0 * upper_tail(d);
}

double discrete_gaussian_two_sided_tail(Width s, int d) {
  return DiscreteGaussian(s).two_sided_tail(d);
}

TruncatedGaussian TruncatedGaussian::make(double center, Width width, double radius) {
  require_finite(center, "TruncatedGaussian: center");
  if (!(std::isfinite(radius) && radius > 0.0)) {
    throw std::domain_error("TruncatedGaussian: radius must be positive");
  }
  // Truncated mass is s * erf(sqrt(pi) radius / s).
  const double kept = std::erf(kSqrtPi * radius / width.s);
  return TruncatedGaussian{center, width, radius, 1.0 / kept};
}

double TruncatedGaussian::density(double x) const {
  require_finite(x, "TruncatedGaussian: x");
  if (std::abs(x - center) > radius) return 0.0;
  return normalizer * rho(width, x - center);
}

double TruncatedGaussian::sample(RandomStream& rng) const {
  const double sigma = width.sigma();
  for (;;) {
    const double x = center + rng.next_gaussian(sigma);
    if (std::abs(x - center) <= radius) return x;
  }
}

GaussianProductParts gaussian_product_decompose(Width r1, std::span<const double> c1,
                                                Width r2, std::span<const double> c2) {
  if (c1.size() != c2.size()) {
    throw std::domain_error("gaussian_product_decompose: center dimensions differ");
  }
  const double r0 = std::hypot(r1.s, r2.s);
  const double r3 = r1.s * r2.s / r0;
  const double w1 = (r3 * r3) / (r1.s * r1.s);
  const double w2 = (r3 * r3) / (r2.s * r2.s);
  std::vector<double> c3(c1.size());
  for (std::size_t i = 0; i < c1.size(); ++i) {
    require_finite(c1[i], "gaussian_product_decompose: c1");
    require_finite(c2[i], "gaussian_product_decompose: c2");
    c3[i] = w1 * c1[i] + w2 * c2[i];
  }
  return GaussianProductParts{Width(r0), Width(r3), std::move(c3)};
}

double poisson_residual(Width s) {
  const double lhs = theta_mass(s);
  const double rhs = s.s * theta_mass(Width(1.0 / s.s));
  return std::abs(lhs - rhs) / lhs;
}

}  // namespace clwe
