#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "clwe/harness.hpp"
#include "clwe/quadrature.hpp"
#include "clwe/stats.hpp"
#include "clwe/verify.hpp"

using namespace clwe;

namespace {
constexpr double kPi = std::numbers::pi_v<double>;

MixtureParams desk_params(int n, std::uint64_t seed, double gamma = 8.0, double out_beta = 0.02) {
  RandomStream rng(seed);
  return MixtureParams::make(CLWEParams::sample(n, rng, gamma, out_beta / 2.0), out_beta);
}

// Two well-separated Gaussian blobs at +-3 e1; linearly separable sanity data.
Dataset toy_separable(std::uint64_t seed, std::uint64_t m) {
  Dataset ds = generate_null(3, m, seed);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ds.xs[i * 3] += ds.labels[i] > 0 ? 3.0 : -3.0;
  }
  ds.manifest.mode = "toy";
  return ds;
}
}  // namespace

TEST_CASE("statistics helpers") {
  // chi-square p-value sanity: P(chi2_1 > 3.841) ~ 0.05
  CHECK(stats::chi_square_p_value(3.841459, 1) == doctest::Approx(0.05).epsilon(1e-4));
  // Kolmogorov Q at the 5% point
  CHECK(stats::kolmogorov_q(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  const auto iv = stats::wilson_interval(50, 100);
  CHECK(iv.low < 0.5);
  CHECK(iv.high > 0.5);
  CHECK(iv.high - iv.low < 0.25);
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
}

TEST_CASE("quadrature") {
  const auto r = quad::integrate([](double x) { return std::sin(x); }, 0.0, kPi, 1e-12);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
  // breakpoint handling of a kink
  const double zero = 0.0;
  const auto kink = quad::integrate_segmented([](double x) { return std::abs(x); }, -1.0, 2.0,
                                              {&zero, 1}, 1e-12);
  CHECK(kink.value == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("empirical error") {
  const Dataset null = generate_null(2, 100000, 5);
  const Hypothesis constant = [](std::span<const double>) { return 1; };
  const auto est = empirical_error(constant, null);
  CHECK(std::abs(est.value() - 0.5) <= 3.0 * stats::binomial_sigma(0.5, 100000));
  CHECK(est.total == 100000);

  // truth labels give zero error
  std::size_t i = 0;
  const Hypothesis truth = [&null, &i](std::span<const double>) { return int{null.labels[i++]}; };
  CHECK(empirical_error(truth, null).value() == 0.0);

  CHECK_THROWS_AS(empirical_error(constant, null, 10, 10), std::domain_error);

  // exchangeability: permuting the dataset does not change the value
  Dataset shuffled = null;
  std::vector<std::size_t> perm(null.size());
  std::iota(perm.begin(), perm.end(), 0);
  RandomStream rng(88);
  for (std::size_t k = perm.size(); k > 1; --k) {
    std::swap(perm[k - 1], perm[static_cast<std::size_t>(rng.next_uniform() * k)]);
  }
  for (std::size_t k = 0; k < perm.size(); ++k) {
    shuffled.labels[k] = null.labels[perm[k]];
    for (int j = 0; j < 2; ++j) shuffled.xs[k * 2 + j] = null.xs[perm[k] * 2 + j];
  }
  const Hypothesis along_x = [](std::span<const double> x) { return x[0] > 0.1 ? 1 : -1; };
  CHECK(empirical_error(along_x, shuffled).mistakes == empirical_error(along_x, null).mistakes);
}

TEST_CASE("baseline learners") {
  SUBCASE("perceptron separates the toy problem") {
    const Dataset ds = toy_separable(11, 4000);
    LearnerSpec spec;
    spec.kind = LearnerSpec::Kind::perceptron;
    spec.learning_rate = 1.0;
    const Hypothesis h = train_baseline(spec, ds, 0, 2000);
    CHECK(empirical_error(h, ds, 2000, 4000).value() <= 0.01);
  }
  SUBCASE("averaged perceptron and logistic also separate it") {
    const Dataset ds = toy_separable(12, 4000);
    for (auto kind : {LearnerSpec::Kind::averaged_perceptron, LearnerSpec::Kind::logistic_gd}) {
      LearnerSpec spec;
      spec.kind = kind;
      spec.learning_rate = kind == LearnerSpec::Kind::logistic_gd ? 0.1 : 1.0;
      const Hypothesis h = train_baseline(spec, ds, 0, 2000);
      CHECK(empirical_error(h, ds, 2000, 4000).value() <= 0.01);
    }
  }
  SUBCASE("poly kernel perceptron learns a quadratic boundary") {
    // labels by a circle with a margin band removed: inseparable linearly,
    // separable at degree 2
    const Dataset raw = generate_null(2, 5000, 13);
    const double r2 = 1.0 / (2.0 * kPi);
    Dataset ds;
    ds.n = 2;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const auto x = raw.point(i);
      const double rr = x[0] * x[0] + x[1] * x[1];
      if (std::abs(rr - r2) < 0.25 * r2) continue;
      ds.xs.insert(ds.xs.end(), x.begin(), x.end());
      ds.labels.push_back(rr > r2 ? 1 : -1);
    }
    LearnerSpec spec;
    spec.kind = LearnerSpec::Kind::poly_kernel_perceptron;
    spec.degree = 2;
    spec.epochs = 5;
    const std::size_t half = ds.size() / 2;
    const Hypothesis h = train_baseline(spec, ds, 0, half);
    CHECK(empirical_error(h, ds, half, ds.size()).value() <= 0.05);
  }
  SUBCASE("logistic on null data stays near 1/2") {
    const Dataset ds = generate_null(8, 40000, 14);
    LearnerSpec spec;
    spec.kind = LearnerSpec::Kind::logistic_gd;
    spec.learning_rate = 0.1;
    const Hypothesis h = train_baseline(spec, ds, 0, 20000);
    const double err = empirical_error(h, ds, 20000, 40000).value();
    CHECK(err >= 0.48);
    CHECK(err <= 0.52);
  }
  SUBCASE("training is deterministic given the spec seed") {
    const Dataset ds = toy_separable(15, 1000);
    LearnerSpec spec;
    spec.kind = LearnerSpec::Kind::logistic_gd;
    spec.seed = 9;
    const Hypothesis h1 = train_baseline(spec, ds, 0, 500);
    const Hypothesis h2 = train_baseline(spec, ds, 0, 500);
    for (std::size_t i = 500; i < 1000; ++i) CHECK(h1(ds.point(i)) == h2(ds.point(i)));
  }
}

TEST_CASE("hoeffding distinguisher") {
  const auto params = desk_params(8, 21);
  const auto oracle = build_oracle(IntervalFamily::build(params), params.plus.base.w, 8);
  const DistinguisherConfig cfg{0.1, 0.5};

  SUBCASE("planted data with the oracle learner") {
    const Dataset ds = generate_mixture(params, 20000, 1234);
    const auto verdict = hoeffding_distinguisher(cfg, oracle_learner(oracle), ds);
    CHECK(verdict.says_planted);
    // err ~ 0.0064, so the margin accounting of the proof holds with room:
    // margin >= 2 tau / 3 > tau / 2
    CHECK(verdict.margin >= 2.0 * cfg.tau / 3.0);
    CHECK(verdict.hoeffding_bound ==
          doctest::Approx(2.0 * std::exp(-(2.0 * 20000.0 / 9.0) * 0.01)));
    CHECK_FALSE(verdict.underpowered);
  }
  SUBCASE("null data with the oracle learner") {
    const Dataset ds = generate_null(8, 20000, 4321);
    const auto verdict = hoeffding_distinguisher(cfg, oracle_learner(oracle), ds);
    CHECK_FALSE(verdict.says_planted);
    CHECK(verdict.margin <= cfg.tau / 3.0);
    // the planted oracle has no advantage on independent labels
    const Hypothesis h = [&oracle](std::span<const double> x) { return oracle.classify(x); };
    const double err = empirical_error(h, ds).value();
    CHECK(std::abs(err - 0.5) <= 3.0 * stats::binomial_sigma(0.5, 20000));
  }
  SUBCASE("underpowered dataset is flagged") {
    const Dataset ds = generate_null(8, 100, 5);
    const auto verdict = hoeffding_distinguisher(DistinguisherConfig{0.1, 0.5},
                                                 oracle_learner(oracle), ds);
    CHECK(verdict.underpowered);  // 100 < 2 / tau^2 = 200
  }
  SUBCASE("config validation") {
    CHECK_THROWS_AS(hoeffding_distinguisher(DistinguisherConfig{0.6, 0.5},
                                            oracle_learner(oracle), generate_null(8, 100, 5)),
                    std::invalid_argument);
  }
}

TEST_CASE("tvd quadrature") {
  SUBCASE("identical densities") {
    auto p = [](double t) { return stats::normal_cdf(t) * 0.0 + std::exp(-t * t); };
    const auto r = tvd_1d_numeric(p, p, -6.0, 6.0);
    CHECK(r.value <= 1e-10);
  }
  SUBCASE("disjoint supports give TVD 1") {
    // two single truncated pancakes with non-overlapping supports;
    // density() integrates to s over the support, so divide by s
    const auto g1 = TruncatedGaussian::make(0.0, Width(0.01), 0.005);
    const auto g2 = TruncatedGaussian::make(0.1, Width(0.01), 0.005);
    auto pn = [&g1](double t) { return g1.density(t) / 0.01; };
    auto qn = [&g2](double t) { return g2.density(t) / 0.01; };
    const double breaks[] = {-0.005, 0.005, 0.095, 0.105};
    const auto r = tvd_1d_numeric(pn, qn, -0.02, 0.13, breaks);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("hclwe vs nhclwe obeys the truncation TVD bound") {
    const auto spec = HCLWESpec::make(CLWEParams::make(1, 8.0, 0.01, {1.0}), 0.0, 0.02,
                                      HCLWESpec::default_alpha(8.0, 0.02));
    const auto r = tvd_hclwe_vs_nhclwe(spec);
    const double bound = 8.0 * std::exp(-1.0 / (400.0 * 0.02 * 0.02));
    CHECK(bound == doctest::Approx(0.0154436330898).epsilon(1e-9));
    CHECK(r.value >= 0.0);
    CHECK(r.value < bound);
  }
}

TEST_CASE("advantage report") {
  const auto params = desk_params(4, 31);
  const auto oracle = build_oracle(IntervalFamily::build(params), params.plus.base.w, 8);
  const DistinguisherConfig cfg{0.1, 0.5};

  SUBCASE("oracle-backed distinguisher has near-perfect advantage") {
    auto says_planted = [&](const Dataset& ds) {
      return hoeffding_distinguisher(cfg, oracle_learner(oracle), ds).says_planted;
    };
    const auto report = advantage_report(says_planted, params, 5000, 100, 77);
    CHECK(report.advantage >= 0.9);
    CHECK(report.tvd_budget < 8.0 * std::exp(-1.0 / (400.0 * 0.02 * 0.02)));
  }
  SUBCASE("coin flip distinguisher has advantage near zero") {
    RandomStream coin(3);
    auto says_planted = [&coin](const Dataset&) { return coin.next_uniform() < 0.5; };
    const auto report = advantage_report(says_planted, params, 200, 200, 78);
    CHECK(report.advantage <= 0.1);
    CHECK(report.interval_low <= 0.1);
    CHECK(report.interval_high >= report.advantage);
  }
  SUBCASE("truncation changes the advantage by at most the TVD budget") {
    // swapping nhCLWE data for hCLWE data moves the oracle-distinguisher's
    // advantage by <= TVD + 3 sigma
    auto says_planted = [&](const Dataset& ds) {
      return hoeffding_distinguisher(cfg, oracle_learner(oracle), ds).says_planted;
    };
    constexpr int kTrials = 100;
    constexpr std::uint64_t kM = 5000;
    const auto truncated = advantage_report(says_planted, params, kM, kTrials, 311);
    MixtureParams untruncated = params;
    untruncated.plus.alpha.reset();
    untruncated.minus.alpha.reset();
    std::uint64_t hits_planted = 0, hits_null = 0;
    for (int t = 0; t < kTrials; ++t) {
      const std::uint64_t seed = splitmix64(311 + static_cast<std::uint64_t>(t));
      if (says_planted(generate_mixture(untruncated, kM, seed))) ++hits_planted;
      if (says_planted(generate_null(4, kM, seed ^ 0x8000000000000000ULL))) ++hits_null;
    }
    const double adv_untruncated =
        std::abs(static_cast<double>(hits_planted) - static_cast<double>(hits_null)) / kTrials;
    const double three_sigma = 3.0 * std::sqrt(2.0 * 0.25 / kTrials);
    CHECK(std::abs(truncated.advantage - adv_untruncated) <= truncated.tvd_budget + three_sigma);
  }
  SUBCASE("baseline-learner distinguisher at n = 32 has no advantage") {
    RandomStream rng(41);
    const auto wide = MixtureParams::make(
        CLWEParams::sample(32, rng, 2.0 * std::sqrt(32.0), 1.0 / 32.0), 2.0 / 32.0);
    LearnerSpec spec;
    spec.kind = LearnerSpec::Kind::logistic_gd;
    spec.learning_rate = 0.1;
    const auto learner = make_learner(spec);
    auto says_planted = [&](const Dataset& ds) {
      return hoeffding_distinguisher(cfg, learner, ds).says_planted;
    };
    const auto report = advantage_report(says_planted, wide, 5000, 100, 79);
    CHECK(report.interval_low <= 0.0);
    CHECK(report.interval_high >= 0.0);
  }
  SUBCASE("trial floor") {
    auto yes = [](const Dataset&) { return true; };
    CHECK_THROWS_AS(advantage_report(yes, params, 10, 50, 1), std::invalid_argument);
  }
}

TEST_CASE("verification report plumbing") {
  VerifyConfig cfg;
  cfg.seed = 12345;

  SUBCASE("criterion 1 passes and the report round-trips") {
    VerificationReport report;
    report.seed = cfg.seed;
    run_criterion(1, cfg, report);
    CHECK(report.all_pass());
    const auto back = VerificationReport::from_json(report.to_json());
    CHECK(back.checks.size() == report.checks.size());
    CHECK(back.to_json() == report.to_json());
    // canonical form strips timings
    const auto canonical = VerificationReport::from_json(report.to_json(false));
    for (const auto& c : canonical.checks) CHECK(c.runtime_s == 0.0);
  }

  SUBCASE("an engineered geometry violation fails one check, others still run") {
    VerifyConfig bad = cfg;
    bad.instance_gamma = 8.0;
    bad.instance_out_beta = 7.0;  // 49 > (3/5) 64 = 38.4
    VerificationReport report;
    run_criterion(5, bad, report);
    CHECK_FALSE(report.all_pass());
    int failed = 0, passed = 0;
    for (const auto& c : report.checks) (c.pass ? passed : failed)++;
    CHECK(failed >= 1);   // instance_disjointness (and the dependent sampler check)
    CHECK(passed >= 2);   // the grid checks are unaffected
    bool grid_ok = false;
    for (const auto& c : report.checks) {
      if (c.name == "disjointness_criterion_grid") grid_ok = c.pass;
    }
    CHECK(grid_ok);
  }
}
