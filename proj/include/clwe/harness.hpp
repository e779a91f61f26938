#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "clwe/instance.hpp"
#include "clwe/oracle.hpp"

namespace clwe {

// Learner-to-distinguisher machinery from the hardness argument, simple
// baseline learners, and the numerical TVD / advantage bookkeeping.

using Hypothesis = std::function<int(std::span<const double>)>;
// A learner maps the training slice [begin, end) of a dataset to a hypothesis.
using Learner = std::function<Hypothesis(const Dataset&, std::size_t, std::size_t)>;

struct ErrorEstimate {
  std::uint64_t mistakes = 0;
  std::uint64_t total = 0;
  double value() const { return static_cast<double>(mistakes) / static_cast<double>(total); }
};

// Fraction of mismatches of h on ds restricted to [begin, end).
ErrorEstimate empirical_error(const Hypothesis& h, const Dataset& ds, std::size_t begin = 0,
                              std::size_t end = static_cast<std::size_t>(-1));

struct LearnerSpec {
  enum class Kind { perceptron, averaged_perceptron, logistic_gd, poly_kernel_perceptron };
  Kind kind = Kind::perceptron;
  int epochs = 3;
  double learning_rate = 0.1;
  int degree = 2;  // poly_kernel_perceptron only
  std::uint64_t seed = 0;
};

Learner make_learner(const LearnerSpec& spec);
// "Learner" that ignores the training data and returns the planted oracle.
Learner oracle_learner(OraclePTF oracle);

struct DistinguisherConfig {
  double tau = 0.1;
  double split = 0.5;

  void validate() const;
};

struct DistinguisherVerdict {
  bool says_planted = false;
  double holdout_error = 0.0;
  double margin = 0.0;           // |err_hat - 1/2|
  double hoeffding_bound = 0.0;  // 2 exp(-(2m/9) tau^2) at the run's m
  bool underpowered = false;     // m < 2 / tau^2
};

// Train on the first split of ds, estimate the error on the rest, answer
// "planted" iff |err_hat - 1/2| > tau/2.
DistinguisherVerdict hoeffding_distinguisher(const DistinguisherConfig& cfg, const Learner& learner,
                                             const Dataset& ds);

Hypothesis train_baseline(const LearnerSpec& spec, const Dataset& ds, std::size_t begin = 0,
                          std::size_t end = static_cast<std::size_t>(-1));

struct TvdResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

// (1/2) integral |p - q| over [lo, hi], split at the given breakpoints.
TvdResult tvd_1d_numeric(const std::function<double(double)>& p,
                         const std::function<double(double)>& q, double lo, double hi,
                         std::span<const double> breakpoints = {});

// TVD between the <w, x> marginals of the hCLWE and nhCLWE distributions of
// `spec` (alpha required), with the segment list derived from the intervals.
TvdResult tvd_hclwe_vs_nhclwe(const HCLWESpec& spec);

struct AdvantageReport {
  double p_planted = 0.0;   // P(distinguisher says planted | planted data)
  double p_null = 0.0;      // P(distinguisher says planted | null data)
  double advantage = 0.0;   // |p_planted - p_null|
  double interval_low = 0.0;   // 95% interval for the difference
  double interval_high = 0.0;
  int trials = 0;
  double tvd_budget = 0.0;  // measured truncated-vs-untruncated TVD
};

// Runs `says_planted` on fresh planted and null datasets (m samples each,
// `trials` pairs). The reported advantage for the truncated instance carries
// over to the untruncated one up to tvd_budget.
AdvantageReport advantage_report(const std::function<bool(const Dataset&)>& says_planted,
                                 const MixtureParams& params, std::uint64_t m, int trials,
                                 std::uint64_t seed);

}  // namespace clwe
