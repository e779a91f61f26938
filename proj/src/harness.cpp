#include "clwe/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "clwe/quadrature.hpp"
#include "clwe/rng.hpp"
#include "clwe/stats.hpp"

namespace clwe {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

int sign_or_plus(double v) { return v < 0.0 ? -1 : 1; }

std::size_t clamp_end(const Dataset& ds, std::size_t end) {
  return std::min(end, ds.size());
}

std::vector<std::size_t> shuffled_indices(std::size_t begin, std::size_t end, RandomStream& rng) {
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(i));
    std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
  }
  return idx;
}

Hypothesis linear_hypothesis(std::vector<double> w, double b) {
  return [w = std::move(w), b](std::span<const double> x) {
    return sign_or_plus(dot(w, x) + b);
  };
}

Hypothesis train_perceptron(const Dataset& ds, std::size_t begin, std::size_t end,
                            const LearnerSpec& spec, bool averaged) {
  const std::size_t n = static_cast<std::size_t>(ds.n);
  std::vector<double> w(n, 0.0), w_sum(n, 0.0);
  double b = 0.0, b_sum = 0.0;
  std::uint64_t steps = 0;
  RandomStream rng(splitmix64(spec.seed ^ 0x7063707472ULL));
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    for (std::size_t i : shuffled_indices(begin, end, rng)) {
      const auto x = ds.point(i);
      const double y = ds.labels[i];
      if (y * (dot(w, x) + b) <= 0.0) {
        for (std::size_t j = 0; j < n; ++j) w[j] += spec.learning_rate * y * x[j];
        b += spec.learning_rate * y;
      }
      if (averaged) {
        for (std::size_t j = 0; j < n; ++j) w_sum[j] += w[j];
        b_sum += b;
        ++steps;
      }
    }
  }
  if (averaged && steps > 0) {
    for (std::size_t j = 0; j < n; ++j) w_sum[j] /= static_cast<double>(steps);
    return linear_hypothesis(std::move(w_sum), b_sum / static_cast<double>(steps));
  }
  return linear_hypothesis(std::move(w), b);
}

Hypothesis train_logistic(const Dataset& ds, std::size_t begin, std::size_t end,
                          const LearnerSpec& spec) {
  const std::size_t n = static_cast<std::size_t>(ds.n);
  std::vector<double> w(n, 0.0);
  double b = 0.0;
  RandomStream rng(splitmix64(spec.seed ^ 0x6c6f676974ULL));
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    for (std::size_t i : shuffled_indices(begin, end, rng)) {
      const auto x = ds.point(i);
      const double y = ds.labels[i];
      const double margin = y * (dot(w, x) + b);
      // d/dw of log(1 + exp(-margin))
      const double g = -y / (1.0 + std::exp(margin));
      for (std::size_t j = 0; j < n; ++j) w[j] -= spec.learning_rate * g * x[j];
      b -= spec.learning_rate * g;
    }
  }
  return linear_hypothesis(std::move(w), b);
}

Hypothesis train_poly_kernel_perceptron(const Dataset& ds, std::size_t begin, std::size_t end,
                                        const LearnerSpec& spec) {
  // Dual perceptron with K(x, x') = (1 + <x, x'>)^degree. Quadratic in the
  // training size; meant for toy-scale demonstrations only.
  struct SupportVector {
    std::size_t index;
    double coef;
  };
  std::vector<SupportVector> sv;
  const int degree = spec.degree;
  auto kernel = [degree](std::span<const double> a, std::span<const double> b) {
    return std::pow(1.0 + dot(a, b), degree);
  };
  auto raw = [&](std::span<const double> x) {
    double acc = 0.0;
    for (const auto& v : sv) acc += v.coef * kernel(ds.point(v.index), x);
    return acc;
  };
  RandomStream rng(splitmix64(spec.seed ^ 0x706f6c79ULL));
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    for (std::size_t i : shuffled_indices(begin, end, rng)) {
      const double y = ds.labels[i];
      if (y * raw(ds.point(i)) <= 0.0) sv.push_back({i, y});
    }
  }
  // Materialize the support points so the hypothesis outlives the dataset.
  std::vector<std::vector<double>> points;
  std::vector<double> coefs;
  points.reserve(sv.size());
  for (const auto& v : sv) {
    const auto x = ds.point(v.index);
    points.emplace_back(x.begin(), x.end());
    coefs.push_back(v.coef);
  }
  return [points = std::move(points), coefs = std::move(coefs), kernel](std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) acc += coefs[i] * kernel(points[i], x);
    return sign_or_plus(acc);
  };
}

}  // namespace

ErrorEstimate empirical_error(const Hypothesis& h, const Dataset& ds, std::size_t begin,
                              std::size_t end) {
  end = clamp_end(ds, end);
  if (begin >= end) throw std::domain_error("empirical_error: empty dataset slice");
  ErrorEstimate est;
  est.total = end - begin;
  for (std::size_t i = begin; i < end; ++i) {
    if (h(ds.point(i)) != ds.labels[i]) ++est.mistakes;
  }
  return est;
}

Hypothesis train_baseline(const LearnerSpec& spec, const Dataset& ds, std::size_t begin,
                          std::size_t end) {
  end = clamp_end(ds, end);
  if (begin >= end) throw std::domain_error("train_baseline: empty training slice");
  switch (spec.kind) {
    case LearnerSpec::Kind::perceptron:
      return train_perceptron(ds, begin, end, spec, false);
    case LearnerSpec::Kind::averaged_perceptron:
      return train_perceptron(ds, begin, end, spec, true);
    case LearnerSpec::Kind::logistic_gd:
      return train_logistic(ds, begin, end, spec);
    case LearnerSpec::Kind::poly_kernel_perceptron:
      return train_poly_kernel_perceptron(ds, begin, end, spec);
  }
  throw std::logic_error("train_baseline: unknown learner kind");
}

Learner make_learner(const LearnerSpec& spec) {
  return [spec](const Dataset& ds, std::size_t begin, std::size_t end) {
    return train_baseline(spec, ds, begin, end);
  };
}

Learner oracle_learner(OraclePTF oracle) {
  return [oracle = std::move(oracle)](const Dataset&, std::size_t, std::size_t) -> Hypothesis {
    return [oracle](std::span<const double> x) { return oracle.classify(x); };
  };
}

void DistinguisherConfig::validate() const {
  if (!(tau > 0.0 && tau < 0.5)) throw std::invalid_argument("DistinguisherConfig: 0 < tau < 1/2");
  if (!(split > 0.0 && split < 1.0)) throw std::invalid_argument("DistinguisherConfig: split in (0, 1)");
}

DistinguisherVerdict hoeffding_distinguisher(const DistinguisherConfig& cfg, const Learner& learner,
                                             const Dataset& ds) {
  cfg.validate();
  const std::size_t m = ds.size();
  const auto cut = static_cast<std::size_t>(static_cast<double>(m) * cfg.split);
  if (cut == 0 || cut >= m) throw std::domain_error("hoeffding_distinguisher: dataset too small to split");
  const Hypothesis h = learner(ds, 0, cut);
  const ErrorEstimate err = empirical_error(h, ds, cut, m);

  DistinguisherVerdict verdict;
  verdict.holdout_error = err.value();
  verdict.margin = std::abs(err.value() - 0.5);
  verdict.says_planted = verdict.margin > cfg.tau / 2.0;
  verdict.hoeffding_bound =
      2.0 * std::exp(-(2.0 * static_cast<double>(m) / 9.0) * cfg.tau * cfg.tau);
  verdict.underpowered = static_cast<double>(m) < 2.0 / (cfg.tau * cfg.tau);
  return verdict;
}

TvdResult tvd_1d_numeric(const std::function<double(double)>& p,
                         const std::function<double(double)>& q, double lo, double hi,
                         std::span<const double> breakpoints) {
  auto half_abs_diff = [&](double t) { return 0.5 * std::abs(p(t) - q(t)); };
  const quad::Result r = quad::integrate_segmented(half_abs_diff, lo, hi, breakpoints, 1e-10);
  if (!std::isfinite(r.value)) throw std::runtime_error("tvd_1d_numeric: quadrature diverged");
  return {r.value, r.error_estimate};
}

TvdResult tvd_hclwe_vs_nhclwe(const HCLWESpec& spec) {
  if (!spec.alpha) throw std::invalid_argument("tvd_hclwe_vs_nhclwe: spec.alpha required");
  const double s = spec.mixture_width();
  const long reach = TailCutoff::certify(Width(s)).k_max + 1;
  const double span = spec.spacing() / 2.0;
  std::vector<double> breaks;
  for (long k = -reach; k <= reach; ++k) {
    const double mu = spec.component_center(k);
    breaks.push_back(mu - *spec.alpha);
    breaks.push_back(mu + *spec.alpha);
  }
  const double lo = spec.component_center(-reach) - span;
  const double hi = spec.component_center(reach) + span;
  const ProjectionDensity plain(spec, false);
  const ProjectionDensity truncated(spec, true);
  return tvd_1d_numeric([&plain](double t) { return plain(t); },
                        [&truncated](double t) { return truncated(t); }, lo, hi, breaks);
}

AdvantageReport advantage_report(const std::function<bool(const Dataset&)>& says_planted,
                                 const MixtureParams& params, std::uint64_t m, int trials,
                                 std::uint64_t seed) {
  if (trials < 100) throw std::invalid_argument("advantage_report: need >= 100 trials");
  std::uint64_t hits_planted = 0, hits_null = 0;
  const int n = params.plus.base.n;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = splitmix64(seed + static_cast<std::uint64_t>(t));
    const Dataset planted = generate_mixture(params, m, trial_seed);
    if (says_planted(planted)) ++hits_planted;
    const Dataset null = generate_null(n, m, trial_seed ^ 0x8000000000000000ULL);
    if (says_planted(null)) ++hits_null;
  }
  AdvantageReport report;
  report.trials = trials;
  report.p_planted = static_cast<double>(hits_planted) / trials;
  report.p_null = static_cast<double>(hits_null) / trials;
  report.advantage = std::abs(report.p_planted - report.p_null);
  const auto iv = stats::newcombe_diff_interval(hits_planted, static_cast<std::uint64_t>(trials),
                                                hits_null, static_cast<std::uint64_t>(trials));
  report.interval_low = iv.low;
  report.interval_high = iv.high;
  report.tvd_budget = tvd_hclwe_vs_nhclwe(params.plus).value;
  return report;
}

}  // namespace clwe
