#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace clwe {

// Machine-checkable verification of every numerical claim the artifact can
// test at desk scale, grouped into the ten acceptance criteria. Each check
// records the claimed bound, the measured value, and the comparison outcome;
// failures never abort the remaining checks.

struct CheckResult {
  std::string name;
  std::string claim;       // human-readable statement of the bound
  double bound = 0.0;      // claimed bound / threshold
  double measured = 0.0;   // measured value
  bool pass = false;
  double runtime_s = 0.0;
  std::string note;        // diagnostics, e.g. an exception message
};

struct VerificationReport {
  int format_version = 1;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool all_pass() const;
  // include_timings=false zeroes the volatile runtime fields, giving the
  // canonical form used for reproducibility comparisons.
  std::string to_json(bool include_timings = true) const;
  static VerificationReport from_json(const std::string& text);
};

struct VerifyConfig {
  std::uint64_t seed = 1;
  int threads = 1;
  // Instance under test for the geometry criterion; overriding these with a
  // pair violating out_beta^2 < (3/5) gamma^2 demonstrates a failing check.
  double instance_gamma = 8.0;
  double instance_out_beta = 0.04;
};

inline constexpr int kCriterionCount = 10;

// Names of the acceptance criteria, index 1..10.
const std::vector<std::string>& criterion_names();

// Runs one criterion (1-based index) and appends its checks to the report.
void run_criterion(int index, const VerifyConfig& cfg, VerificationReport& report);

VerificationReport verify_all(const VerifyConfig& cfg);
VerificationReport verify_criteria(const std::vector<int>& indices, const VerifyConfig& cfg);

}  // namespace clwe
