#pragma once

#include <optional>
#include <span>
#include <vector>

#include "clwe/gaussian.hpp"
#include "clwe/rng.hpp"

namespace clwe {

// The CLWE distribution over (y, z): y ~ N(0, I/(2 pi)), e ~ N(0, b^2/(2 pi)),
// z = gamma <w, y> + e mod 1, plus the homogeneous variants obtained by
// conditioning z near a phase c (mixtures of Gaussian "pancakes" along w).

struct CLWEParams {
  int n;
  double gamma;
  double beta;
  std::vector<double> w;  // unit vector, hidden direction

  // Validates n >= 1, 0 < beta <= gamma, ||w|| = 1 within 1e-12.
  static CLWEParams make(int n, double gamma, double beta, std::vector<double> w);
  // Random hidden direction. Uses the hardness-regime default gamma = 2 sqrt(n)
  // and beta = 1/n when the optional values are not given.
  static CLWEParams sample(int n, RandomStream& rng, double gamma = 0.0, double beta = 0.0);
};

struct CLWESample {
  std::vector<double> y;
  double z;  // in [0, 1)
};

// Parameters of an hCLWE / non-overlapping hCLWE distribution. The mixture
// has component centers gamma k / (out_beta^2 + gamma^2) - c / gamma along w,
// weights proportional to rho_s(k) with s = sqrt(out_beta^2 + gamma^2), and
// per-component width out_beta / s. A present truncation radius `alpha`
// selects the non-overlapping variant.
struct HCLWESpec {
  CLWEParams base;
  double c;         // phase offset in [0, 1)
  double out_beta;  // noise width of this distribution
  std::optional<double> alpha;

  static HCLWESpec make(CLWEParams base, double c, double out_beta,
                        std::optional<double> alpha = std::nullopt);

  // 1/10 * gamma / (gamma^2 + out_beta^2).
  static double default_alpha(double gamma, double out_beta);

  double mixture_width() const;      // s = sqrt(out_beta^2 + gamma^2)
  double component_width() const;    // out_beta / s (rho-convention)
  double component_center(long k) const;
  double spacing() const;            // gamma / s^2
};

// Rejection filter of the CLWE -> hCLWE reduction: accept a sample (y, z)
// with probability g(z) = g0(z) / M, g0(z) = sum_k rho_delta(z + k + c).
struct RejectionConfig {
  double delta;
  double c;
  double m_bound;  // M = sup_z g0(z), attained at z = -c mod 1

  // Computes M = rho_delta(Z) and verifies M >= g0 on a 10^4-point grid.
  static RejectionConfig make(double delta, double c);

  double g0(double z) const;
  double accept_prob(double z) const { return g0(z) / m_bound; }
  // Closed-form per-sample acceptance probability on CLWE input with noise
  // width beta: delta * rho_{s'}(Z) / (s' M), s' = sqrt(beta^2+delta^2+gamma^2).
  double acceptance_rate(const CLWEParams& p) const;
};

// Uniform on the unit sphere S^{n-1}.
std::vector<double> sample_secret_direction(int n, RandomStream& rng);

CLWESample sample_clwe(const CLWEParams& p, RandomStream& rng);

// Joint density of the CLWE distribution at (y, z), z in [0, 1).
double clwe_density(const CLWEParams& p, std::span<const double> y, double z);

// Sampler for hCLWE (alpha absent) and non-overlapping hCLWE (alpha present).
// Component index from D_{Z,s}, w-coordinate from the (truncated) component
// Gaussian, orthogonal complement standard N(0, I_{n-1}/(2 pi)).
class HCLWESampler {
 public:
  explicit HCLWESampler(HCLWESpec spec);

  void sample_into(RandomStream& rng, std::span<double> out) const;
  std::vector<double> sample(RandomStream& rng) const;

  const HCLWESpec& spec() const noexcept { return spec_; }

 private:
  HCLWESpec spec_;
  DiscreteGaussian component_;
  double comp_sigma_;
};

std::vector<double> sample_hclwe_direct(const HCLWESpec& spec, RandomStream& rng);
// Requires spec.alpha.
std::vector<double> sample_nhclwe(const HCLWESpec& spec, RandomStream& rng);

// Normalized density of <w, x> under hCLWE (truncated = false) or nhCLWE
// (truncated = true, requires spec.alpha); the orthogonal marginal is
// standard Gaussian and independent. Caches the theta normalizer, so use one
// instance for quadrature loops.
class ProjectionDensity {
 public:
  ProjectionDensity(HCLWESpec spec, bool truncated);

  double operator()(double t) const;
  const HCLWESpec& spec() const noexcept { return spec_; }

 private:
  HCLWESpec spec_;
  bool truncated_;
  double mass_;
  double spacing_;
  double comp_width_;
  double renorm_;
  long reach_;
};

double hclwe_projection_density(const HCLWESpec& spec, double t);
double nhclwe_projection_density(const HCLWESpec& spec, double t);

// One step of the rejection reduction. Returns y when accepted. Accepted
// outputs follow hCLWE with noise width sqrt(beta^2 + delta^2) and offset c.
std::optional<std::vector<double>> reject_transform(const CLWEParams& p, const RejectionConfig& cfg,
                                                    const CLWESample& input, RandomStream& rng);

// Null path: input (y, z) with z uniform and independent of y; accepted
// outputs are exactly N(0, I/(2 pi)).
std::optional<std::vector<double>> reject_transform_null(const RejectionConfig& cfg,
                                                         std::span<const double> y, double z,
                                                         RandomStream& rng);

}  // namespace clwe
