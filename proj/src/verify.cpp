#include "clwe/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clwe/harness.hpp"
#include "clwe/quadrature.hpp"
#include "clwe/stats.hpp"

namespace clwe {

namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi_v<double>;

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::uint64_t check_seed(const VerifyConfig& cfg, std::uint64_t salt) {
  return splitmix64(cfg.seed) ^ splitmix64(salt);
}

// Runs the body, times it, and converts exceptions into failed checks so one
// broken criterion cannot take down the rest of the suite.
class Suite {
 public:
  Suite(VerificationReport& report) : report_(report) {}

  void add(const std::string& name, const std::string& claim, double bound,
           const std::function<std::pair<double, bool>(CheckResult&)>& body) {
    CheckResult check;
    check.name = name;
    check.claim = claim;
    check.bound = bound;
    const auto start = std::chrono::steady_clock::now();
    try {
      auto [measured, pass] = body(check);
      check.measured = measured;
      check.pass = pass;
    } catch (const std::exception& e) {
      check.measured = std::numeric_limits<double>::quiet_NaN();
      check.pass = false;
      check.note = e.what();
    }
    check.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report_.checks.push_back(std::move(check));
  }

  // Most checks are "measured <= bound".
  void add_le(const std::string& name, const std::string& claim, double bound,
              const std::function<double(CheckResult&)>& measure) {
    add(name, claim, bound, [&measure, bound](CheckResult& c) {
      const double m = measure(c);
      return std::make_pair(m, m <= bound);
    });
  }

 private:
  VerificationReport& report_;
};

MixtureParams desk_mixture(int n, double gamma, double beta, double out_beta, RandomStream& rng) {
  return MixtureParams::make(CLWEParams::sample(n, rng, gamma, beta), out_beta);
}

// CDF of the hCLWE projection, evaluated against a prebuilt component table.
class HclweProjectionCdf {
 public:
  explicit HclweProjectionCdf(const HCLWESpec& spec)
      : spec_(spec), dg_(Width(spec.mixture_width())), sigma_(Width(spec.component_width()).sigma()) {}

  double operator()(double t) const {
    double acc = 0.0;
    for (int k = -dg_.k_max(); k <= dg_.k_max(); ++k) {
      acc += dg_.prob(k) * stats::normal_cdf(t, spec_.component_center(k), sigma_);
    }
    return acc;
  }

 private:
  const HCLWESpec& spec_;
  DiscreteGaussian dg_;
  double sigma_;
};

// Equal-mass bin edges from the hCLWE projection CDF (bisection).
std::vector<double> hclwe_equal_mass_edges(const HCLWESpec& spec, int bins) {
  const HclweProjectionCdf cdf(spec);
  const double s = spec.mixture_width();
  const double span = (TailCutoff::certify(Width(s)).k_max + 2) * spec.spacing();
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  edges.front() = -std::numeric_limits<double>::infinity();
  edges.back() = std::numeric_limits<double>::infinity();
  for (int i = 1; i < bins; ++i) {
    const double target = static_cast<double>(i) / bins;
    double lo = -span, hi = span;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < target ? lo : hi) = mid;
    }
    edges[static_cast<std::size_t>(i)] = 0.5 * (lo + hi);
  }
  return edges;
}

std::vector<double> bin_counts(std::span<const double> values, std::span<const double> edges) {
  std::vector<double> counts(edges.size() - 1, 0.0);
  for (double v : values) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    const auto idx = std::clamp<std::ptrdiff_t>(it - edges.begin() - 1, 0,
                                                static_cast<std::ptrdiff_t>(counts.size()) - 1);
    counts[static_cast<std::size_t>(idx)] += 1.0;
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Criterion 1: identity suite.

void criterion_identities(const VerifyConfig& cfg, Suite& suite) {
  suite.add_le("poisson_residual_grid",
               "max_s |rho_s(Z) - s rho_{1/s}(Z)| / rho_s(Z) <= 1e-10 on s in [0.1, 16]", 1e-10,
               [](CheckResult&) {
                 double worst = 0.0;
                 for (int i = 0; i <= 32; ++i) {
                   const double s = 0.1 * std::pow(160.0, i / 32.0);
                   worst = std::max(worst, poisson_residual(Width(s)));
                 }
                 worst = std::max({worst, poisson_residual(Width(1.0)), poisson_residual(Width(8.0)),
                                   poisson_residual(Width(16.0))});
                 return worst;
               });

  suite.add_le("gaussian_product_identity",
               "pointwise relative error of the product decomposition <= 1e-12 on 10^3 inputs",
               1e-12, [&cfg](CheckResult&) {
                 RandomStream rng(check_seed(cfg, 0x11));
                 double worst = 0.0;
                 for (int trial = 0; trial < 1000; ++trial) {
                   const int dim = 1 + static_cast<int>(rng.next_uniform() * 4.0);
                   const Width r1(0.5 + 1.5 * rng.next_uniform());
                   const Width r2(0.5 + 1.5 * rng.next_uniform());
                   std::vector<double> c1(dim), c2(dim), x(dim), xc1(dim), xc2(dim), cd(dim);
                   for (int j = 0; j < dim; ++j) {
                     c1[j] = 3.0 * (rng.next_uniform() - 0.5);
                     c2[j] = 3.0 * (rng.next_uniform() - 0.5);
                     x[j] = 4.0 * (rng.next_uniform() - 0.5);
                     xc1[j] = x[j] - c1[j];
                     xc2[j] = x[j] - c2[j];
                     cd[j] = c1[j] - c2[j];
                   }
                   const auto parts = gaussian_product_decompose(r1, c1, r2, c2);
                   std::vector<double> xc3(dim);
                   for (int j = 0; j < dim; ++j) xc3[j] = x[j] - parts.c3[j];
                   const double lhs = rho(r1, xc1) * rho(r2, xc2);
                   const double rhs = rho(parts.r0, cd) * rho(parts.r3, xc3);
                   worst = std::max(worst, std::abs(lhs - rhs) / std::max(lhs, 1e-280));
                 }
                 return worst;
               });

  suite.add_le("rho_integral_1d", "quadrature of rho_s over R equals s to rel. err 1e-8", 1e-8,
               [](CheckResult&) {
                 double worst = 0.0;
                 for (double s : {0.5, 1.0, 2.0}) {
                   const Width w(s);
                   const auto r = quad::integrate([w](double x) { return rho(w, x); }, -12.0 * s,
                                                  12.0 * s, 1e-13);
                   worst = std::max(worst, std::abs(r.value - s) / s);
                 }
                 return worst;
               });

  suite.add_le("rho_integral_2d", "2-D quadrature of rho over R^2 equals 1 to rel. err 1e-6", 1e-6,
               [](CheckResult&) {
                 const Width w(1.0);
                 auto inner = [w](double y) {
                   return quad::integrate(
                              [w, y](double x) {
                                const double v[2] = {x, y};
                                return rho(w, v);
                              },
                              -8.0, 8.0, 1e-10)
                       .value;
                 };
                 const auto r = quad::integrate(inner, -8.0, 8.0, 1e-9);
                 return std::abs(r.value - 1.0);
               });
}

// ---------------------------------------------------------------------------
// Criterion 2: density suite (n = 1).

void criterion_densities(const VerifyConfig& cfg, Suite& suite) {
  const auto clwe = CLWEParams::make(1, 2.0, 0.25, {1.0});

  suite.add_le("clwe_density_integral", "CLWE joint density integrates to 1 to rel. err 1e-6",
               1e-6, [&clwe](CheckResult&) {
                 auto inner = [&clwe](double y) {
                   const double yv[1] = {y};
                   return quad::integrate(
                              [&clwe, &yv](double z) { return clwe_density(clwe, yv, z); }, 0.0,
                              std::nextafter(1.0, 0.0), 1e-10)
                       .value;
                 };
                 const auto r = quad::integrate(inner, -6.0, 6.0, 1e-9);
                 return std::abs(r.value - 1.0);
               });

  const auto hspec = HCLWESpec::make(CLWEParams::make(1, 8.0, 0.02, {1.0}), 0.0, 0.04);

  suite.add_le("hclwe_density_integral", "hCLWE density integrates to 1 to rel. err 1e-6", 1e-6,
               [&hspec](CheckResult&) {
                 const long reach = TailCutoff::certify(Width(hspec.mixture_width())).k_max + 2;
                 std::vector<double> breaks;
                 for (long k = -reach; k <= reach; ++k) breaks.push_back(hspec.component_center(k));
                 const double lo = hspec.component_center(-reach);
                 const double hi = hspec.component_center(reach);
                 const ProjectionDensity density(hspec, false);
                 const auto r = quad::integrate_segmented(
                     [&density](double t) { return density(t); }, lo, hi, breaks, 1e-10);
                 return std::abs(r.value - 1.0);
               });

  suite.add("clwe_sampler_chi2",
            "CLWE sampler histogram passes chi-square vs the density at significance 1e-3 "
            "(40x40 grid, 10^6 samples)",
            1e-3, [&cfg, &clwe](CheckResult& check) {
              constexpr int kBins = 40;
              constexpr std::uint64_t kSamples = 1000000;
              const double sigma_y = 1.0 / std::sqrt(2.0 * kPi);
              // y bins at Gaussian quantiles, z bins uniform.
              std::vector<double> y_edges(kBins + 1);
              y_edges.front() = -std::numeric_limits<double>::infinity();
              y_edges.back() = std::numeric_limits<double>::infinity();
              for (int i = 1; i < kBins; ++i) {
                y_edges[i] = stats::normal_quantile(static_cast<double>(i) / kBins, 0.0, sigma_y);
              }
              // Expected cell masses by quadrature of the joint density.
              const Width b(clwe.beta);
              const int reach = TailCutoff::certify(b).k_max + 2;
              auto slice_mass = [&](double y, double z0, double z1) {
                const double t = clwe.gamma * y;
                const long k0 = std::lround(t);
                double acc = 0.0;
                for (long k = k0 - reach; k <= k0 + reach; ++k) {
                  acc += stats::normal_cdf(z1 + k - t, 0.0, b.sigma()) -
                         stats::normal_cdf(z0 + k - t, 0.0, b.sigma());
                }
                return acc;
              };
              std::vector<double> expected(kBins * kBins);
              for (int iy = 0; iy < kBins; ++iy) {
                const double lo = std::max(y_edges[iy], -8.0 * sigma_y);
                const double hi = std::min(y_edges[iy + 1], 8.0 * sigma_y);
                for (int iz = 0; iz < kBins; ++iz) {
                  const double z0 = static_cast<double>(iz) / kBins;
                  const double z1 = static_cast<double>(iz + 1) / kBins;
                  const auto r = quad::integrate(
                      [&](double y) { return rho(Width(1.0), y) * slice_mass(y, z0, z1); }, lo, hi,
                      1e-9, 10);
                  expected[iy * kBins + iz] = r.value * kSamples;
                }
              }
              // Observed counts.
              RandomStream rng(check_seed(cfg, 0x21));
              std::vector<double> observed(kBins * kBins, 0.0);
              for (std::uint64_t i = 0; i < kSamples; ++i) {
                const CLWESample s = sample_clwe(clwe, rng);
                const auto ity = std::upper_bound(y_edges.begin(), y_edges.end(), s.y[0]);
                const int iy = std::clamp<int>(static_cast<int>(ity - y_edges.begin()) - 1, 0, kBins - 1);
                const int iz = std::clamp<int>(static_cast<int>(s.z * kBins), 0, kBins - 1);
                observed[iy * kBins + iz] += 1.0;
              }
              // Pool cells whose expectation is too small for the chi-square
              // asymptotics.
              std::vector<double> obs_binned, exp_binned;
              double obs_rest = 0.0, exp_rest = 0.0;
              for (int i = 0; i < kBins * kBins; ++i) {
                if (expected[static_cast<std::size_t>(i)] >= 10.0) {
                  obs_binned.push_back(observed[static_cast<std::size_t>(i)]);
                  exp_binned.push_back(expected[static_cast<std::size_t>(i)]);
                } else {
                  obs_rest += observed[static_cast<std::size_t>(i)];
                  exp_rest += expected[static_cast<std::size_t>(i)];
                }
              }
              if (exp_rest > 0.0) {
                obs_binned.push_back(obs_rest);
                exp_binned.push_back(exp_rest);
              }
              const auto res = stats::chi_square_gof(obs_binned, exp_binned);
              check.note = "chi2 = " + std::to_string(res.statistic) + ", dof = " + std::to_string(res.dof);
              return std::make_pair(res.p_value, res.p_value >= 1e-3);
            });

  suite.add("hclwe_sampler_chi2",
            "hCLWE sampler histogram passes chi-square vs the density at significance 1e-3 "
            "(60 equal-mass bins, 10^6 samples)",
            1e-3, [&cfg, &hspec](CheckResult& check) {
              constexpr int kBins = 60;
              constexpr std::uint64_t kSamples = 1000000;
              const auto edges = hclwe_equal_mass_edges(hspec, kBins);
              const HclweProjectionCdf cdf(hspec);
              std::vector<double> expected(kBins);
              for (int i = 0; i < kBins; ++i) {
                const double lo = i == 0 ? 0.0 : cdf(edges[i]);
                const double hi = i == kBins - 1 ? 1.0 : cdf(edges[i + 1]);
                expected[i] = (hi - lo) * kSamples;
              }
              RandomStream rng(check_seed(cfg, 0x22));
              const HCLWESampler sampler(hspec);
              std::vector<double> ts(kSamples);
              std::vector<double> x(1);
              for (auto& t : ts) {
                sampler.sample_into(rng, x);
                t = x[0];
              }
              const auto counts = bin_counts(ts, edges);
              const auto res = stats::chi_square_gof(counts, expected);
              check.note = "chi2 = " + std::to_string(res.statistic) + ", dof = " + std::to_string(res.dof);
              return std::make_pair(res.p_value, res.p_value >= 1e-3);
            });
}

// ---------------------------------------------------------------------------
// Criterion 3: reduction equivalence.

void criterion_reduction(const VerifyConfig& cfg, Suite& suite) {
  const int n = 4;
  const double gamma = 8.0, beta = 0.02;
  const double delta = std::sqrt(3.0) * beta;
  constexpr std::uint64_t kAccepted = 100000;

  RandomStream dir_rng(check_seed(cfg, 0x30));
  const auto params = CLWEParams::sample(n, dir_rng, gamma, beta);
  const auto rcfg = RejectionConfig::make(delta, 0.0);
  const auto direct_spec = HCLWESpec::make(params, 0.0, 2.0 * beta);

  suite.add("reduction_two_sample_chi2",
            "reject_transform output and direct hCLWE sampler agree (two-sample chi-square, 60 "
            "bins, 10^5 each, significance 1e-3)",
            1e-3, [&](CheckResult& check) {
              RandomStream rng(check_seed(cfg, 0x31));
              std::vector<double> reduced;
              reduced.reserve(kAccepted);
              std::uint64_t attempts = 0;
              while (reduced.size() < kAccepted) {
                const CLWESample s = sample_clwe(params, rng);
                ++attempts;
                if (auto y = reject_transform(params, rcfg, s, rng)) {
                  reduced.push_back(dot(*y, params.w));
                }
              }
              const HCLWESampler sampler(direct_spec);
              std::vector<double> direct(kAccepted);
              std::vector<double> x(n);
              for (auto& t : direct) {
                sampler.sample_into(rng, x);
                t = dot(x, params.w);
              }
              const auto edges = hclwe_equal_mass_edges(direct_spec, 60);
              const auto res =
                  stats::chi_square_two_sample(bin_counts(reduced, edges), bin_counts(direct, edges));
              check.note = "chi2 = " + std::to_string(res.statistic) + ", attempts = " + std::to_string(attempts);
              return std::make_pair(res.p_value, res.p_value >= 1e-3);
            });

  suite.add("reduction_null_ks",
            "null-path accepted outputs pass per-coordinate KS vs N(0, 1/(2 pi)) at 1e-3", 1e-3,
            [&](CheckResult& check) {
              RandomStream rng(check_seed(cfg, 0x32));
              const double sigma = 1.0 / std::sqrt(2.0 * kPi);
              std::vector<std::vector<double>> coords(n);
              std::uint64_t accepted = 0, attempts = 0;
              std::vector<double> y(n);
              while (accepted < kAccepted) {
                for (auto& v : y) v = rng.next_gaussian(sigma);
                const double z = rng.next_uniform();
                ++attempts;
                if (auto out = reject_transform_null(rcfg, y, z, rng)) {
                  ++accepted;
                  for (int j = 0; j < n; ++j) coords[j].push_back((*out)[j]);
                }
              }
              double min_p = 1.0;
              for (int j = 0; j < n; ++j) {
                const auto ks = stats::ks_test(std::move(coords[j]), [sigma](double v) {
                  return stats::normal_cdf(v, 0.0, sigma);
                });
                min_p = std::min(min_p, ks.p_value);
              }
              check.note = "null-path acceptance = " +
                           std::to_string(static_cast<double>(accepted) / attempts);
              return std::make_pair(min_p, min_p >= 1e-3);
            });

  suite.add("reduction_acceptance_planted",
            "measured acceptance on CLWE input is >= delta/4 and within 3 sigma of the "
            "closed-form rate",
            3.0, [&](CheckResult& check) {
              RandomStream rng(check_seed(cfg, 0x33));
              constexpr std::uint64_t kAttempts = 2000000;
              std::uint64_t accepted = 0;
              for (std::uint64_t i = 0; i < kAttempts; ++i) {
                const CLWESample s = sample_clwe(params, rng);
                if (reject_transform(params, rcfg, s, rng)) ++accepted;
              }
              const double p = rcfg.acceptance_rate(params);
              const double measured = static_cast<double>(accepted) / kAttempts;
              const double sig = stats::binomial_sigma(p, kAttempts);
              const double sigmas = std::abs(measured - p) / sig;
              check.note = "measured = " + std::to_string(measured) + ", closed form = " +
                           std::to_string(p) + ", delta/4 = " + std::to_string(delta / 4.0);
              return std::make_pair(sigmas, sigmas <= 3.0 && measured >= delta / 4.0 && measured <= 1.0);
            });

  suite.add("reduction_acceptance_null",
            "null-path acceptance is within 3 sigma of delta/M", 3.0, [&](CheckResult& check) {
              RandomStream rng(check_seed(cfg, 0x34));
              constexpr std::uint64_t kAttempts = 2000000;
              const double sigma = 1.0 / std::sqrt(2.0 * kPi);
              std::uint64_t accepted = 0;
              std::vector<double> y(n);
              for (std::uint64_t i = 0; i < kAttempts; ++i) {
                for (auto& v : y) v = rng.next_gaussian(sigma);
                if (reject_transform_null(rcfg, y, rng.next_uniform(), rng)) ++accepted;
              }
              const double p = delta / rcfg.m_bound;
              const double measured = static_cast<double>(accepted) / kAttempts;
              const double sigmas = std::abs(measured - p) / stats::binomial_sigma(p, kAttempts);
              check.note = "measured = " + std::to_string(measured) + ", delta/M = " + std::to_string(p);
              return std::make_pair(sigmas, sigmas <= 3.0);
            });
}

// ---------------------------------------------------------------------------
// Criterion 4: truncation TVD.

void criterion_tvd(const VerifyConfig&, Suite& suite) {
  const double bound = 8.0 * std::exp(-6.25);
  suite.add("truncation_tvd_bound",
            "quadrature TVD(hCLWE, nhCLWE) at gamma=8, out_beta=0.02 is strictly below "
            "8 exp(-1/(400 beta^2)) = 8 exp(-6.25)",
            bound, [bound](CheckResult& check) {
              const auto spec = HCLWESpec::make(
                  CLWEParams::make(1, 8.0, 0.01, {1.0}), 0.0, 0.02,
                  HCLWESpec::default_alpha(8.0, 0.02));
              const TvdResult tvd = tvd_hclwe_vs_nhclwe(spec);
              check.note = "quadrature error estimate = " + std::to_string(tvd.error_estimate);
              return std::make_pair(tvd.value, tvd.value >= 0.0 && tvd.value < bound);
            });
}

// ---------------------------------------------------------------------------
// Criterion 5: geometry.

void criterion_geometry(const VerifyConfig& cfg, Suite& suite) {
  suite.add_le("disjointness_criterion_grid",
               "supports_disjoint agrees with out_beta^2 < (3/5) gamma^2 on a 20x20 grid "
               "including the boundary",
               0.0, [](CheckResult&) {
                 int disagreements = 0;
                 for (int gi = 1; gi <= 20; ++gi) {
                   const double gamma = 0.5 * gi;
                   for (int ti = 1; ti <= 20; ++ti) {
                     // ti == 10 lands exactly on beta^2 = (3/5) gamma^2.
                     const double t = 0.1 * ti;
                     const double beta = gamma * std::sqrt(0.6) * t;
                     const auto fam = IntervalFamily::build(
                         gamma, beta, HCLWESpec::default_alpha(gamma, beta));
                     const bool algebraic = 5.0 * beta * beta < 3.0 * gamma * gamma;
                     if (fam.disjoint() != algebraic) ++disagreements;
                   }
                 }
                 return static_cast<double>(disagreements);
               });

  suite.add_le("gap_formula_consistency",
               "gap > 2 alpha matches the algebraic criterion away from the boundary", 0.0,
               [](CheckResult&) {
                 int disagreements = 0;
                 for (int gi = 1; gi <= 20; ++gi) {
                   const double gamma = 0.5 * gi;
                   for (int ti = 1; ti <= 20; ++ti) {
                     const double t = 0.1 * ti;
                     if (ti == 10) continue;  // ulp-ambiguous by construction
                     const double beta = gamma * std::sqrt(0.6) * t;
                     const auto fam = IntervalFamily::build(
                         gamma, beta, HCLWESpec::default_alpha(gamma, beta));
                     const bool geometric = fam.gap() > 2.0 * fam.alpha;
                     const bool algebraic = 5.0 * beta * beta < 3.0 * gamma * gamma;
                     if (geometric != algebraic) ++disagreements;
                   }
                 }
                 return static_cast<double>(disagreements);
               });

  suite.add("instance_disjointness",
            "configured instance satisfies out_beta^2 < (3/5) gamma^2", 0.0,
            [&cfg](CheckResult& check) {
              const double g = cfg.instance_gamma, b = cfg.instance_out_beta;
              const auto fam = IntervalFamily::build(g, b, HCLWESpec::default_alpha(g, b));
              check.note = "out_beta^2 = " + std::to_string(b * b) + " vs (3/5) gamma^2 = " +
                           std::to_string(0.6 * g * g);
              return std::make_pair(fam.disjoint() ? 0.0 : 1.0, fam.disjoint());
            });

  suite.add_le("mixture_support_separation",
               "no sample lies within alpha of both interval families (10^6 samples)", 0.0,
               [&cfg](CheckResult&) {
                 RandomStream rng(check_seed(cfg, 0x51));
                 const auto params = desk_mixture(4, cfg.instance_gamma, cfg.instance_out_beta / 2.0,
                                                  cfg.instance_out_beta, rng);
                 const auto fam = IntervalFamily::build(params);
                 const Dataset ds = generate_mixture(params, 1000000, check_seed(cfg, 0x52));
                 const auto& w = params.plus.base.w;
                 std::uint64_t overlaps = 0;
                 for (std::size_t i = 0; i < ds.size(); ++i) {
                   const double t = dot(ds.point(i), w);
                   const double slots = t * fam.s2() / fam.gamma;
                   const bool in_plus =
                       std::abs(t - fam.center_plus(std::lround(slots))) <= fam.alpha;
                   const bool in_minus =
                       std::abs(t - fam.center_minus(std::lround(
                                        slots + 0.5 * fam.s2() / (fam.gamma * fam.gamma)))) <=
                       fam.alpha;
                   if (in_plus && in_minus) ++overlaps;
                 }
                 return static_cast<double>(overlaps);
               });
}

// ---------------------------------------------------------------------------
// Criterion 6: oracle.

void criterion_oracle(const VerifyConfig& cfg, Suite& suite) {
  const int n = 16, d = 8;
  const double gamma = 8.0, out_beta = 0.02;
  constexpr std::uint64_t kSamples = 1000000;

  RandomStream rng(check_seed(cfg, 0x60));
  const auto params = desk_mixture(n, gamma, out_beta / 2.0, out_beta, rng);
  const double exact = oracle_error_exact(params, d);
  const auto oracle = build_oracle(IntervalFamily::build(params), params.plus.base.w, d);
  const double tail_bound = std::exp(-kPi * d * d / (out_beta * out_beta + gamma * gamma));

  suite.add_le("oracle_error_bound",
               "exact oracle error <= exp(-pi d^2 / (beta^2 + gamma^2))", tail_bound,
               [exact](CheckResult& check) {
                 check.note = "exact error = " + std::to_string(exact);
                 return exact;
               });

  const Dataset ds = generate_mixture(params, kSamples, check_seed(cfg, 0x61), cfg.threads);

  suite.add("oracle_error_empirical",
            "empirical misclassification over 10^6 samples within 3 binomial sigma of the exact "
            "error",
            3.0, [&](CheckResult& check) {
              std::uint64_t mistakes = 0;
              for (std::size_t i = 0; i < ds.size(); ++i) {
                if (oracle.classify(ds.point(i)) != ds.labels[i]) ++mistakes;
              }
              const double emp = static_cast<double>(mistakes) / kSamples;
              const double sigmas = std::abs(emp - exact) / stats::binomial_sigma(exact, kSamples);
              check.note = "empirical = " + std::to_string(emp) + ", exact = " + std::to_string(exact);
              return std::make_pair(sigmas, sigmas <= 3.0);
            });

  suite.add_le("oracle_region_consistency",
               "misclassified iff region == always_wrong; no off-support sample (zero exceptions)",
               0.0, [&](CheckResult&) {
                 std::uint64_t exceptions = 0;
                 for (std::size_t i = 0; i < ds.size(); ++i) {
                   const auto region = conditional_error_class(oracle, ds.point(i));
                   const bool wrong = oracle.classify(ds.point(i)) != ds.labels[i];
                   if (region == RegionClass::off_support) ++exceptions;
                   else if (wrong != (region == RegionClass::always_wrong)) ++exceptions;
                 }
                 return static_cast<double>(exceptions);
               });
}

// ---------------------------------------------------------------------------
// Criterion 7: embedding.

void criterion_embedding(const VerifyConfig& cfg, Suite& suite) {
  const int n = 3, d = 8;
  const double gamma = 8.0, out_beta = 0.02;

  RandomStream rng(check_seed(cfg, 0x70));
  const auto params = desk_mixture(n, gamma, out_beta / 2.0, out_beta, rng);
  const auto oracle = build_oracle(IntervalFamily::build(params), params.plus.base.w, d);
  const auto espec = EmbeddingSpec::make(n, 4 * d);
  const auto weights = ltf_weights(oracle, espec);

  auto ltf_sign = [&](std::span<const double> x, std::vector<double>& buffer) {
    embed_monomials(espec, x, buffer);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < buffer.size(); ++i) {
      acc += static_cast<long double>(weights[i]) * static_cast<long double>(buffer[i]);
    }
    return acc < 0.0L ? -1 : 1;
  };
  auto near_root = [&](std::span<const double> x) {
    const double t = dot(oracle.w, x);
    for (double r : oracle.roots) {
      if (std::abs(t - r) < 1e-9) return true;
    }
    return false;
  };

  suite.add("embedding_sign_random",
            "sign(<W, phi(x)>) equals classify(x) on 10^4 random points (points within 1e-9 of a "
            "root excluded)",
            0.0, [&](CheckResult& check) {
              RandomStream prng(check_seed(cfg, 0x71));
              const double sigma = 1.0 / std::sqrt(2.0 * kPi);
              std::vector<double> x(n), buffer(espec.padded_dim);
              std::uint64_t disagreements = 0, excluded = 0;
              for (int i = 0; i < 10000; ++i) {
                for (auto& v : x) v = prng.next_gaussian(sigma);
                if (near_root(x)) {
                  ++excluded;
                  continue;
                }
                if (ltf_sign(x, buffer) != oracle.classify(x)) ++disagreements;
              }
              check.note = "excluded near-root points: " + std::to_string(excluded);
              return std::make_pair(static_cast<double>(disagreements), disagreements == 0);
            });

  suite.add("embedding_sign_dataset",
            "sign(<W, phi(x)>) equals classify(x) on every point of a 10^5-sample dataset", 0.0,
            [&](CheckResult& check) {
              const Dataset ds = generate_mixture(params, 100000, check_seed(cfg, 0x72));
              std::vector<double> buffer(espec.padded_dim);
              std::uint64_t disagreements = 0, excluded = 0;
              for (std::size_t i = 0; i < ds.size(); ++i) {
                const auto x = ds.point(i);
                if (near_root(x)) {
                  ++excluded;
                  continue;
                }
                if (ltf_sign(x, buffer) != oracle.classify(x)) ++disagreements;
              }
              check.note = "excluded near-root points: " + std::to_string(excluded);
              return std::make_pair(static_cast<double>(disagreements), disagreements == 0);
            });
}

// ---------------------------------------------------------------------------
// Criterion 8: distinguisher.

void criterion_distinguisher(const VerifyConfig& cfg, Suite& suite) {
  const int n = 16, d = 8;
  const double gamma = 8.0, out_beta = 0.02;
  constexpr std::uint64_t kM = 100000;
  constexpr int kTrials = 100;
  const DistinguisherConfig dcfg{0.1, 0.5};

  suite.add("distinguisher_planted_trials",
            "oracle-as-learner answers `planted` on planted data in >= 95 of 100 seeded trials",
            95.0, [&](CheckResult& check) {
              int hits = 0;
              for (int t = 0; t < kTrials; ++t) {
                RandomStream rng(check_seed(cfg, 0x8100 + static_cast<std::uint64_t>(t)));
                const auto params = desk_mixture(n, gamma, out_beta / 2.0, out_beta, rng);
                const auto oracle = build_oracle(IntervalFamily::build(params), params.plus.base.w, d);
                const Dataset ds =
                    generate_mixture(params, kM, check_seed(cfg, 0x8200 + static_cast<std::uint64_t>(t)),
                                     cfg.threads);
                const auto verdict = hoeffding_distinguisher(dcfg, oracle_learner(oracle), ds);
                if (verdict.says_planted) ++hits;
              }
              check.note = std::to_string(hits) + " / 100";
              return std::make_pair(static_cast<double>(hits), hits >= 95);
            });

  suite.add("distinguisher_null_trials",
            "oracle-as-learner answers `null` on null data in >= 95 of 100 seeded trials", 95.0,
            [&](CheckResult& check) {
              int hits = 0;
              for (int t = 0; t < kTrials; ++t) {
                RandomStream rng(check_seed(cfg, 0x8300 + static_cast<std::uint64_t>(t)));
                const auto params = desk_mixture(n, gamma, out_beta / 2.0, out_beta, rng);
                const auto oracle = build_oracle(IntervalFamily::build(params), params.plus.base.w, d);
                const Dataset ds =
                    generate_null(n, kM, check_seed(cfg, 0x8400 + static_cast<std::uint64_t>(t)),
                                  cfg.threads);
                const auto verdict = hoeffding_distinguisher(dcfg, oracle_learner(oracle), ds);
                if (!verdict.says_planted) ++hits;
              }
              check.note = std::to_string(hits) + " / 100";
              return std::make_pair(static_cast<double>(hits), hits >= 95);
            });

  suite.add("coinflip_advantage",
            "coin-flip distinguisher's 95% advantage interval reaches values <= 0.1 (400 trials)",
            0.1, [&](CheckResult& check) {
              RandomStream coin(check_seed(cfg, 0x85));
              RandomStream rng(check_seed(cfg, 0x86));
              const auto params = desk_mixture(n, gamma, out_beta / 2.0, out_beta, rng);
              const auto report = advantage_report(
                  [&coin](const Dataset&) { return coin.next_uniform() < 0.5; }, params, 1000, 400,
                  check_seed(cfg, 0x87));
              // smallest advantage consistent with the interval of p0 - p1
              const bool straddles = report.interval_low <= 0.0 && report.interval_high >= 0.0;
              const double min_adv = straddles ? 0.0
                                               : std::min(std::abs(report.interval_low),
                                                          std::abs(report.interval_high));
              check.note = "advantage = " + std::to_string(report.advantage) + ", interval = [" +
                           std::to_string(report.interval_low) + ", " +
                           std::to_string(report.interval_high) + "]";
              return std::make_pair(min_adv, min_adv <= 0.1);
            });
}

// ---------------------------------------------------------------------------
// Criterion 9: hardness smoke check.

void criterion_baselines(const VerifyConfig& cfg, Suite& suite) {
  const int n = 32;
  const double gamma = 2.0 * std::sqrt(32.0), beta = 1.0 / 32.0, out_beta = 2.0 / 32.0;
  constexpr std::uint64_t kM = 100000;
  constexpr int kSeeds = 10;

  auto run = [&](LearnerSpec::Kind kind, CheckResult& check) {
    double worst = 0.0;
    std::ostringstream errs;
    for (int t = 0; t < kSeeds; ++t) {
      RandomStream rng(check_seed(cfg, 0x9100 + static_cast<std::uint64_t>(t)));
      const auto params = desk_mixture(n, gamma, beta, out_beta, rng);
      const Dataset ds = generate_mixture(params, kM, check_seed(cfg, 0x9200 + static_cast<std::uint64_t>(t)),
                                          cfg.threads);
      LearnerSpec spec;
      spec.kind = kind;
      spec.epochs = 3;
      spec.learning_rate = kind == LearnerSpec::Kind::logistic_gd ? 0.1 : 1.0;
      spec.seed = check_seed(cfg, 0x9300 + static_cast<std::uint64_t>(t));
      const Hypothesis h = train_baseline(spec, ds, 0, kM / 2);
      const double err = empirical_error(h, ds, kM / 2, kM).value();
      errs << (t ? ", " : "") << err;
      worst = std::max(worst, std::abs(err - 0.5));
    }
    check.note = "held-out errors: " + errs.str();
    return worst;
  };

  suite.add_le("baseline_perceptron_error",
               "perceptron held-out error within [0.48, 0.52] across 10 seeds (n=32, m=10^5)", 0.02,
               [&run](CheckResult& check) { return run(LearnerSpec::Kind::perceptron, check); });
  suite.add_le("baseline_logistic_error",
               "logistic held-out error within [0.48, 0.52] across 10 seeds (n=32, m=10^5)", 0.02,
               [&run](CheckResult& check) { return run(LearnerSpec::Kind::logistic_gd, check); });
}

// ---------------------------------------------------------------------------
// Criterion 10: reproducibility.

void criterion_reproducibility(const VerifyConfig& cfg, Suite& suite) {
  suite.add_le("dataset_thread_invariance",
               "identical (params, seed) give bitwise-identical datasets for 1 and 4 threads", 0.0,
               [&cfg](CheckResult&) {
                 RandomStream rng(check_seed(cfg, 0xa1));
                 const auto params = desk_mixture(8, 2.0 * std::sqrt(8.0), 1.0 / 8.0, 2.0 / 8.0, rng);
                 const std::uint64_t seed = check_seed(cfg, 0xa2);
                 const Dataset a = generate_mixture(params, 20000, seed, 1);
                 const Dataset b = generate_mixture(params, 20000, seed, 4);
                 const Dataset c = generate_mixture(params, 20000, seed, 1);
                 std::uint64_t mismatches = 0;
                 if (a.xs != b.xs || a.labels != b.labels) ++mismatches;
                 if (a.xs != c.xs || a.labels != c.labels) ++mismatches;
                 const Dataset na = generate_null(8, 20000, seed, 1);
                 const Dataset nb = generate_null(8, 20000, seed, 4);
                 if (na.xs != nb.xs || na.labels != nb.labels) ++mismatches;
                 if (a.manifest.to_json() != b.manifest.to_json()) ++mismatches;
                 return static_cast<double>(mismatches);
               });

  suite.add_le("report_determinism",
               "re-running a criterion with the same seed reproduces the canonical report", 0.0,
               [&cfg](CheckResult&) {
                 VerificationReport r1, r2;
                 r1.seed = r2.seed = cfg.seed;
                 run_criterion(1, cfg, r1);
                 run_criterion(1, cfg, r2);
                 return r1.to_json(false) == r2.to_json(false) ? 0.0 : 1.0;
               });
}

}  // namespace

bool VerificationReport::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return !checks.empty();
}

std::string VerificationReport::to_json(bool include_timings) const {
  json j;
  j["format_version"] = format_version;
  j["seed"] = seed;
  j["all_pass"] = all_pass();
  j["checks"] = json::array();
  for (const auto& c : checks) {
    json jc;
    jc["name"] = c.name;
    jc["claim"] = c.claim;
    jc["bound"] = c.bound;
    jc["measured"] = c.measured;
    jc["pass"] = c.pass;
    jc["runtime_s"] = include_timings ? c.runtime_s : 0.0;
    jc["seed"] = seed;
    if (!c.note.empty()) jc["note"] = c.note;
    j["checks"].push_back(std::move(jc));
  }
  return j.dump(2);
}

VerificationReport VerificationReport::from_json(const std::string& text) {
  const json j = json::parse(text);
  VerificationReport report;
  report.format_version = j.at("format_version").get<int>();
  report.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& jc : j.at("checks")) {
    CheckResult c;
    c.name = jc.at("name").get<std::string>();
    c.claim = jc.at("claim").get<std::string>();
    c.bound = jc.at("bound").get<double>();
    c.measured = jc.at("measured").get<double>();
    c.pass = jc.at("pass").get<bool>();
    c.runtime_s = jc.at("runtime_s").get<double>();
    if (jc.contains("note")) c.note = jc.at("note").get<std::string>();
    report.checks.push_back(std::move(c));
  }
  return report;
}

const std::vector<std::string>& criterion_names() {
  static const std::vector<std::string> names = {
      "identities",    "densities", "reduction", "truncation_tvd", "geometry",
      "oracle",        "embedding", "distinguisher", "baselines",  "reproducibility",
  };
  return names;
}

void run_criterion(int index, const VerifyConfig& cfg, VerificationReport& report) {
  Suite suite(report);
  switch (index) {
    case 1: criterion_identities(cfg, suite); break;
    case 2: criterion_densities(cfg, suite); break;
    case 3: criterion_reduction(cfg, suite); break;
    case 4: criterion_tvd(cfg, suite); break;
    case 5: criterion_geometry(cfg, suite); break;
    case 6: criterion_oracle(cfg, suite); break;
    case 7: criterion_embedding(cfg, suite); break;
    case 8: criterion_distinguisher(cfg, suite); break;
    case 9: criterion_baselines(cfg, suite); break;
    case 10: criterion_reproducibility(cfg, suite); break;
    default: throw std::invalid_argument("run_criterion: index must be 1..10");
  }
}

VerificationReport verify_all(const VerifyConfig& cfg) {
  std::vector<int> all(kCriterionCount);
  for (int i = 0; i < kCriterionCount; ++i) all[static_cast<std::size_t>(i)] = i + 1;
  return verify_criteria(all, cfg);
}

VerificationReport verify_criteria(const std::vector<int>& indices, const VerifyConfig& cfg) {
  VerificationReport report;
  report.seed = cfg.seed;
  for (int index : indices) run_criterion(index, cfg, report);
  return report;
}

}  // namespace clwe
