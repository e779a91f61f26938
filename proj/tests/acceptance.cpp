// Acceptance suite: runs the ten verification criteria end to end, prints one
// pass/fail line per criterion, and writes the machine-readable report.
//
//   acceptance [--criterion N] [--seed S] [--threads T] [--report PATH]
//
// Exit status is nonzero if any executed check fails.

#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "clwe/verify.hpp"

int main(int argc, char** argv) {
  clwe::VerifyConfig cfg;
  std::vector<int> criteria;
  std::string report_path;

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto next = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "missing value for " << arg << "\n";
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--criterion") {
      criteria.push_back(std::stoi(next()));
    } else if (arg == "--seed") {
      cfg.seed = std::stoull(next());
    } else if (arg == "--threads") {
      cfg.threads = std::stoi(next());
    } else if (arg == "--report") {
      report_path = next();
    } else {
      std::cerr << "unknown argument: " << arg << "\n";
      return 2;
    }
  }
  if (criteria.empty()) {
    for (int i = 1; i <= clwe::kCriterionCount; ++i) criteria.push_back(i);
  }

  const auto& names = clwe::criterion_names();
  clwe::VerificationReport report;
  report.seed = cfg.seed;
  bool all_ok = true;
  for (int index : criteria) {
    const std::size_t before = report.checks.size();
    clwe::run_criterion(index, cfg, report);
    bool ok = true;
    double runtime = 0.0;
    for (std::size_t i = before; i < report.checks.size(); ++i) {
      ok &= report.checks[i].pass;
      runtime += report.checks[i].runtime_s;
    }
    all_ok &= ok;
    std::printf("[%s] criterion %2d %-16s (%.1fs)\n", ok ? "PASS" : "FAIL", index,
                names[static_cast<std::size_t>(index - 1)].c_str(), runtime);
    for (std::size_t i = before; i < report.checks.size(); ++i) {
      const auto& c = report.checks[i];
      std::printf("  %-4s %-32s measured %-12.6g bound %-12.6g %s\n", c.pass ? "ok" : "FAIL",
                  c.name.c_str(), c.measured, c.bound, c.note.c_str());
    }
    std::fflush(stdout);
  }

  if (!report_path.empty()) {
    std::ofstream f(report_path);
    f << report.to_json() << "\n";
  }
  std::printf("%s\n", all_ok ? "ACCEPTANCE: ALL CRITERIA PASSED" : "ACCEPTANCE: FAILURES PRESENT");
  return all_ok ? 0 : 1;
}
