// pancakes: generate CLWE pancake-mixture classification instances, export
// the planted oracle, run the verification suite, and run distinguishing
// experiments. Exit codes: 0 ok, 1 check failure, 2 parameter error,
// 3 I/O failure, 4 missing artifact.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clwe/harness.hpp"
#include "clwe/verify.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitCheckFailure = 1;
constexpr int kExitParameter = 2;
constexpr int kExitIo = 3;
constexpr int kExitMissingArtifact = 4;

struct RunConfig {
  std::string mode = "planted";
  int n = 32;
  std::uint64_t m = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  int d = 8;
  double tau = 0.1;
  // 0 means "derive the default from n / beta".
  double gamma = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double out_beta = 0.0;
  double alpha = 0.0;
  double c_plus = 0.0;
  double c_minus = 0.5;
  bool unsafe = false;

  void resolve() {
    if (gamma == 0.0) gamma = 2.0 * std::sqrt(static_cast<double>(n));
    if (beta == 0.0) beta = 1.0 / static_cast<double>(n);
    if (delta == 0.0) delta = std::sqrt(3.0) * beta;
    if (out_beta == 0.0) out_beta = std::hypot(beta, delta);
    if (alpha == 0.0) alpha = clwe::HCLWESpec::default_alpha(gamma, out_beta);
  }

  json resolved_json() const {
    json j;
    j["mode"] = mode;
    j["n"] = n;
    j["m"] = m;
    j["seed"] = seed;
    j["threads"] = threads;
    j["d"] = d;
    j["tau"] = tau;
    j["gamma"] = gamma;
    j["beta"] = beta;
    j["delta"] = delta;
    j["out_beta"] = out_beta;
    j["alpha"] = alpha;
    j["c_plus"] = c_plus;
    j["c_minus"] = c_minus;
    return j;
  }

  clwe::MixtureParams mixture(clwe::RandomStream& rng) const {
    auto base = clwe::CLWEParams::sample(n, rng, gamma, beta);
    const bool disjoint = 5.0 * out_beta * out_beta < 3.0 * gamma * gamma;
    if (!disjoint && !unsafe) {
      throw std::invalid_argument(
          "support disjointness violated: requires out_beta^2 < (3/5) gamma^2, got " +
          std::to_string(out_beta * out_beta) + " >= " + std::to_string(0.6 * gamma * gamma) +
          " (pass --unsafe to bypass)");
    }
    if (disjoint && c_plus == 0.0 && c_minus == 0.5) {
      return clwe::MixtureParams::make(std::move(base), out_beta, alpha);
    }
    // Non-default phases or --unsafe: assemble the pair without the
    // pair-level validation.
    if (!disjoint) std::cerr << "warning: generating with overlapping supports (--unsafe)\n";
    clwe::CLWEParams minus_base = base;
    return clwe::MixtureParams{
        clwe::HCLWESpec{std::move(base), c_plus, out_beta, alpha},
        clwe::HCLWESpec{std::move(minus_base), c_minus, out_beta, alpha}};
  }
};

void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--n", cfg.n, "ambient dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--m", cfg.m, "number of samples");
  cmd->add_option("--seed", cfg.seed, "master seed");
  cmd->add_option("--threads", cfg.threads, "worker threads (result is thread-count invariant)");
  cmd->add_option("--gamma", cfg.gamma, "gamma (default 2 sqrt(n))");
  cmd->add_option("--beta", cfg.beta, "CLWE noise width (default 1/n)");
  cmd->add_option("--delta", cfg.delta, "reduction smoothing width (default sqrt(3) beta)");
  cmd->add_option("--out-beta", cfg.out_beta, "mixture noise width (default sqrt(beta^2+delta^2))");
  cmd->add_option("--alpha", cfg.alpha, "truncation radius (default gamma/10 / (gamma^2+out_beta^2))");
  cmd->add_option("--c-plus", cfg.c_plus, "phase of the +1 class");
  cmd->add_option("--c-minus", cfg.c_minus, "phase of the -1 class");
  cmd->add_option("--d", cfg.d, "oracle degree parameter (PTF degree 4d)")->check(CLI::PositiveNumber);
}

int cmd_generate(RunConfig cfg, const std::string& out, const std::string& secret_out, bool blind) {
  cfg.resolve();
  std::cout << "resolved config: " << cfg.resolved_json().dump() << "\n";
  clwe::Dataset ds;
  std::optional<std::vector<double>> secret;
  if (cfg.mode == "planted") {
    clwe::RandomStream rng(clwe::splitmix64(cfg.seed ^ 0x77655F646972ULL));
    const auto params = cfg.mixture(rng);
    secret = params.plus.base.w;
    ds = clwe::generate_mixture(params, cfg.m, cfg.seed, cfg.threads);
  } else if (cfg.mode == "null") {
    ds = clwe::generate_null(cfg.n, cfg.m, cfg.seed, cfg.threads);
  } else {
    throw std::invalid_argument("mode must be 'planted' or 'null'");
  }
  clwe::write_dataset(ds, out);
  std::cout << "wrote " << ds.size() << " samples to " << out << "\n";
  std::cout << "manifest: " << ds.manifest.to_json() << "\n";
  if (secret && !blind) {
    const std::string side = secret_out.empty() ? out + ".secret" : secret_out;
    clwe::write_secret(*secret, cfg.seed, side);
    std::cout << "wrote secret sidecar to " << side << "\n";
  }
  return 0;
}

int cmd_oracle(RunConfig cfg, const std::string& dataset, const std::string& secret_path,
               const std::string& export_path, const std::string& export_ltf, int deg) {
  std::vector<double> w;
  if (!dataset.empty()) {
    const auto man = clwe::read_manifest(dataset);
    if (man.mode != "planted") throw std::invalid_argument("oracle needs a planted dataset");
    cfg.n = man.n;
    cfg.gamma = man.gamma.value_or(cfg.gamma);
    cfg.beta = man.beta.value_or(cfg.beta);
    cfg.out_beta = man.out_beta.value_or(cfg.out_beta);
    cfg.alpha = man.alpha.value_or(cfg.alpha);
    cfg.resolve();
    const std::string side = secret_path.empty() ? dataset + ".secret" : secret_path;
    if (!std::filesystem::exists(side)) {
      throw clwe::IoError(clwe::IoErrorKind::missing_artifact,
                          "dataset is blind: secret sidecar not found at " + side);
    }
    w = clwe::read_secret(side);
    if (man.secret_digest && *man.secret_digest != clwe::secret_digest(w)) {
      throw clwe::IoError(clwe::IoErrorKind::checksum_mismatch,
                          "secret sidecar does not match the dataset's secret digest");
    }
  } else {
    cfg.resolve();
    clwe::RandomStream rng(clwe::splitmix64(cfg.seed ^ 0x77655F646972ULL));
    w = clwe::sample_secret_direction(cfg.n, rng);
  }
  std::cout << "resolved config: " << cfg.resolved_json().dump() << "\n";

  const auto fam = clwe::IntervalFamily::build(cfg.gamma, cfg.out_beta, cfg.alpha);
  const auto oracle = clwe::build_oracle(fam, std::move(w), cfg.d);
  const auto base = clwe::CLWEParams::make(cfg.n, cfg.gamma, cfg.out_beta / 2.0, oracle.w);
  const auto params = clwe::MixtureParams::make(base, cfg.out_beta, cfg.alpha);
  const double exact = clwe::oracle_error_exact(params, cfg.d);
  const double s2 = cfg.out_beta * cfg.out_beta + cfg.gamma * cfg.gamma;
  const double tail_bound = std::exp(-std::numbers::pi * cfg.d * cfg.d / s2);
  std::cout << "oracle degree 4d = " << oracle.degree() << ", roots = " << oracle.roots.size() << "\n";
  std::cout << "exact misclassification error = " << exact << "\n";
  std::cout << "discrete-Gaussian tail bound exp(-pi d^2/(beta^2+gamma^2)) = " << tail_bound << "\n";
  if (!export_path.empty()) {
    std::ofstream f(export_path);
    if (!f) throw clwe::IoError(clwe::IoErrorKind::io, "cannot write " + export_path);
    f << oracle.to_json() << "\n";
    std::cout << "wrote oracle to " << export_path << "\n";
  }
  if (!export_ltf.empty()) {
    const int use_deg = deg == 0 ? oracle.degree() : deg;
    const auto espec = clwe::EmbeddingSpec::make(cfg.n, use_deg);
    const auto weights = clwe::ltf_weights(oracle, espec);
    json j;
    j["n"] = cfg.n;
    j["degree"] = use_deg;
    j["monomial_order"] = "grlex-v1";
    j["M"] = weights.size();
    j["weights"] = weights;
    std::ofstream f(export_ltf);
    if (!f) throw clwe::IoError(clwe::IoErrorKind::io, "cannot write " + export_ltf);
    f << j.dump() << "\n";
    std::cout << "wrote LTF weights (M = " << weights.size() << ") to " << export_ltf << "\n";
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg, const std::vector<int>& criteria, const std::string& report_path,
               bool stable_output, double instance_gamma, double instance_out_beta) {
  clwe::VerifyConfig vcfg;
  vcfg.seed = cfg.seed;
  vcfg.threads = cfg.threads;
  if (instance_gamma != 0.0) vcfg.instance_gamma = instance_gamma;
  if (instance_out_beta != 0.0) vcfg.instance_out_beta = instance_out_beta;

  const auto& names = clwe::criterion_names();
  clwe::VerificationReport report;
  report.seed = vcfg.seed;
  std::vector<int> run = criteria;
  if (run.empty()) {
    for (int i = 1; i <= clwe::kCriterionCount; ++i) run.push_back(i);
  }
  for (int index : run) {
    const std::size_t before = report.checks.size();
    clwe::run_criterion(index, vcfg, report);
    bool ok = true;
    for (std::size_t i = before; i < report.checks.size(); ++i) ok &= report.checks[i].pass;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << index << " " << names[static_cast<std::size_t>(index - 1)]
              << "\n";
    for (std::size_t i = before; i < report.checks.size(); ++i) {
      const auto& c = report.checks[i];
      std::cout << "       " << (c.pass ? "ok  " : "FAIL") << " " << c.name
                << ": measured " << c.measured << " vs bound " << c.bound;
      if (!c.note.empty()) std::cout << " (" << c.note << ")";
      std::cout << "\n";
    }
  }
  if (!report_path.empty()) {
    std::ofstream f(report_path);
    if (!f) throw clwe::IoError(clwe::IoErrorKind::io, "cannot write " + report_path);
    f << report.to_json(!stable_output) << "\n";
    std::cout << "wrote report to " << report_path << "\n";
  }
  std::cout << (report.all_pass() ? "ALL CHECKS PASSED" : "CHECK FAILURES PRESENT") << "\n";
  return report.all_pass() ? 0 : kExitCheckFailure;
}

int cmd_distinguish(RunConfig cfg, const std::string& dataset, const std::string& secret_path,
                    int trials, const std::string& learner_name) {
  cfg.resolve();
  clwe::DistinguisherConfig dcfg;
  dcfg.tau = cfg.tau;

  auto learner_for = [&](const clwe::OraclePTF& oracle) -> clwe::Learner {
    if (learner_name == "oracle") return clwe::oracle_learner(oracle);
    clwe::LearnerSpec spec;
    spec.seed = cfg.seed;
    if (learner_name == "perceptron") {
      spec.kind = clwe::LearnerSpec::Kind::perceptron;
      spec.learning_rate = 1.0;
    } else if (learner_name == "averaged_perceptron") {
      spec.kind = clwe::LearnerSpec::Kind::averaged_perceptron;
      spec.learning_rate = 1.0;
    } else if (learner_name == "logistic") {
      spec.kind = clwe::LearnerSpec::Kind::logistic_gd;
      spec.learning_rate = 0.1;
    } else {
      throw std::invalid_argument("unknown learner: " + learner_name);
    }
    return clwe::make_learner(spec);
  };

  if (!dataset.empty()) {
    const clwe::Dataset ds = clwe::read_dataset(dataset);
    clwe::OraclePTF oracle;
    if (learner_name == "oracle") {
      const std::string side = secret_path.empty() ? dataset + ".secret" : secret_path;
      if (!std::filesystem::exists(side)) {
        throw clwe::IoError(clwe::IoErrorKind::missing_artifact,
                            "oracle learner needs the secret sidecar: " + side);
      }
      auto w = clwe::read_secret(side);
      const auto man = ds.manifest;
      const auto fam = clwe::IntervalFamily::build(man.gamma.value(), man.out_beta.value(),
                                                   man.alpha.value());
      oracle = clwe::build_oracle(fam, std::move(w), cfg.d);
    }
    const auto verdict = clwe::hoeffding_distinguisher(dcfg, learner_for(oracle), ds);
    json j;
    j["verdict"] = verdict.says_planted ? "planted" : "null";
    j["holdout_error"] = verdict.holdout_error;
    j["margin"] = verdict.margin;
    j["tau"] = dcfg.tau;
    j["hoeffding_bound"] = verdict.hoeffding_bound;
    j["underpowered"] = verdict.underpowered;
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  // Monte-Carlo advantage over fresh instances.
  clwe::RandomStream rng(clwe::splitmix64(cfg.seed ^ 0x616476ULL));
  const auto params = cfg.mixture(rng);
  const auto oracle = clwe::build_oracle(clwe::IntervalFamily::build(params), params.plus.base.w,
                                         cfg.d);
  const auto learner = learner_for(oracle);
  auto says_planted = [&](const clwe::Dataset& ds) {
    return clwe::hoeffding_distinguisher(dcfg, learner, ds).says_planted;
  };
  const auto report = clwe::advantage_report(says_planted, params, cfg.m, trials, cfg.seed);
  json j;
  j["trials"] = report.trials;
  j["p_planted"] = report.p_planted;
  j["p_null"] = report.p_null;
  j["advantage"] = report.advantage;
  j["interval_95"] = {report.interval_low, report.interval_high};
  j["tvd_budget"] = report.tvd_budget;
  j["hoeffding_bound"] = 2.0 * std::exp(-(2.0 * static_cast<double>(cfg.m) / 9.0) * cfg.tau * cfg.tau);
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CLWE pancake-mixture hard instances: generation, oracle, verification"};
  app.require_subcommand(1);

  RunConfig cfg;

  auto* gen = app.add_subcommand("generate", "generate a planted or null dataset");
  std::string out = "dataset.clwf", secret_out;
  bool blind = false;
  add_common_flags(gen, cfg);
  gen->add_option("--mode", cfg.mode, "planted | null")
      ->check(CLI::IsMember({"planted", "null"}));
  gen->add_option("--out", out, "output dataset path");
  gen->add_option("--secret-out", secret_out, "secret sidecar path (default <out>.secret)");
  gen->add_flag("--blind", blind, "do not write the secret sidecar");
  gen->add_flag("--unsafe", cfg.unsafe, "bypass the disjointness check");

  auto* orc = app.add_subcommand("oracle", "build and export the planted PTF oracle");
  std::string oracle_dataset, oracle_secret, oracle_export, oracle_ltf;
  int oracle_deg = 0;
  add_common_flags(orc, cfg);
  orc->add_option("--dataset", oracle_dataset, "planted dataset to bind the oracle to");
  orc->add_option("--secret", oracle_secret, "secret sidecar (default <dataset>.secret)");
  orc->add_option("--export", oracle_export, "write the oracle JSON here");
  orc->add_option("--export-ltf", oracle_ltf, "write lifted LTF weights here");
  orc->add_option("--deg", oracle_deg, "embedding degree for --export-ltf (default 4d)");

  auto* ver = app.add_subcommand("verify", "run the numerical verification suite");
  std::vector<int> criteria;
  std::string report_path = "report.json";
  bool stable_output = false;
  double instance_gamma = 0.0, instance_out_beta = 0.0;
  ver->add_option("--seed", cfg.seed, "master seed");
  ver->add_option("--threads", cfg.threads, "worker threads");
  ver->add_option("--criteria", criteria, "criterion indices (1..10, default all)")
      ->check(CLI::Range(1, 10));
  ver->add_option("--report", report_path, "report JSON path");
  ver->add_flag("--stable-output", stable_output, "zero volatile fields (timings) in the report");
  ver->add_option("--instance-gamma", instance_gamma, "override the geometry instance gamma");
  ver->add_option("--instance-out-beta", instance_out_beta, "override the geometry instance out_beta");

  auto* dis = app.add_subcommand("distinguish", "run the Hoeffding distinguisher");
  std::string dis_dataset, dis_secret, learner_name = "oracle";
  int trials = 100;
  add_common_flags(dis, cfg);
  dis->add_option("--tau", cfg.tau, "advantage threshold");
  dis->add_option("--dataset", dis_dataset, "single dataset to judge (else Monte-Carlo trials)");
  dis->add_option("--secret", dis_secret, "secret sidecar for the oracle learner");
  dis->add_option("--trials", trials, "Monte-Carlo trial count");
  dis->add_option("--learner", learner_name, "oracle | perceptron | averaged_perceptron | logistic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParameter;
  }

  try {
    if (gen->parsed()) return cmd_generate(cfg, out, secret_out, blind);
    if (orc->parsed()) return cmd_oracle(cfg, oracle_dataset, oracle_secret, oracle_export, oracle_ltf, oracle_deg);
    if (ver->parsed())
      return cmd_verify(cfg, criteria, report_path, stable_output, instance_gamma, instance_out_beta);
    if (dis->parsed()) return cmd_distinguish(cfg, dis_dataset, dis_secret, trials, learner_name);
  } catch (const clwe::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == clwe::IoErrorKind::missing_artifact ? kExitMissingArtifact : kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParameter;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParameter;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
