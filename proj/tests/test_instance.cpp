#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "clwe/instance.hpp"
#include "clwe/stats.hpp"

using namespace clwe;

namespace {
constexpr double kPi = std::numbers::pi_v<double>;

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

MixtureParams test_mixture(int n, std::uint64_t seed, double gamma = 8.0, double out_beta = 0.04) {
  RandomStream rng(seed);
  return MixtureParams::make(CLWEParams::sample(n, rng, gamma, out_beta / 2.0), out_beta);
}
}  // namespace

TEST_CASE("mixture construction enforces disjointness") {
  RandomStream rng(1);
  auto base = CLWEParams::sample(4, rng, 8.0, 0.02);
  CHECK_THROWS_WITH_AS(MixtureParams::make(base, 7.0).plus.c == 0.0,
                       doctest::Contains("(3/5) gamma^2"), std::invalid_argument);
  const auto params = MixtureParams::make(base, 0.04);
  CHECK(params.plus.c == 0.0);
  CHECK(params.minus.c == 0.5);
  CHECK(params.plus.alpha.value() == doctest::Approx(HCLWESpec::default_alpha(8.0, 0.04)));
}

TEST_CASE("generate_mixture basic statistics") {
  const auto params = test_mixture(4, 11);
  constexpr std::uint64_t kM = 100000;
  const Dataset ds = generate_mixture(params, kM, 2024);
  const auto& w = params.plus.base.w;
  const double alpha = params.plus.alpha.value();

  std::uint64_t plus = 0, support_violations = 0, dual_violations = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double t = dot(ds.point(i), w);
    const auto& spec = ds.labels[i] > 0 ? params.plus : params.minus;
    const long k = std::lround((t + spec.c / spec.base.gamma) / spec.spacing());
    if (std::abs(t - spec.component_center(k)) > alpha) ++support_violations;
    const auto& other = ds.labels[i] > 0 ? params.minus : params.plus;
    const long ko = std::lround((t + other.c / other.base.gamma) / other.spacing());
    if (std::abs(t - other.component_center(ko)) <= alpha) ++dual_violations;
    if (ds.labels[i] > 0) ++plus;
  }
  CHECK(support_violations == 0);
  CHECK(dual_violations == 0);
  const double frac = static_cast<double>(plus) / kM;
  CHECK(std::abs(frac - 0.5) <= 3.0 * stats::binomial_sigma(0.5, kM));
  CHECK(ds.manifest.mode == "planted");
  CHECK(ds.manifest.m == kM);
  CHECK(ds.manifest.secret_digest.has_value());
}

TEST_CASE("positive-class marginal matches the nhclwe sampler") {
  const auto params = test_mixture(3, 12);
  const Dataset ds = generate_mixture(params, 60000, 99);
  const auto& w = params.plus.base.w;
  std::vector<double> from_mixture;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] > 0) from_mixture.push_back(dot(ds.point(i), w));
  }
  RandomStream rng(100);
  const HCLWESampler sampler(params.plus);
  std::vector<double> direct(from_mixture.size());
  std::vector<double> x(3);
  for (auto& t : direct) {
    sampler.sample_into(rng, x);
    t = dot(x, w);
  }
  const double lim = 3.0 * params.plus.spacing();
  std::vector<double> edges{-std::numeric_limits<double>::infinity()};
  for (int i = 1; i < 30; ++i) edges.push_back(-lim + 2.0 * lim * i / 30.0);
  edges.push_back(std::numeric_limits<double>::infinity());
  std::vector<double> ca(31, 0.0), cb(31, 0.0);
  for (double t : from_mixture)
    ca[static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), t) - edges.begin() - 1)] += 1.0;
  for (double t : direct)
    cb[static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), t) - edges.begin() - 1)] += 1.0;
  CHECK(stats::chi_square_two_sample(ca, cb).p_value >= 1e-3);
}

TEST_CASE("generate_null independence and moments") {
  constexpr std::uint64_t kM = 100000;
  const Dataset ds = generate_null(6, kM, 7);
  double corr = 0.0, var = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    corr += ds.labels[i] * ds.point(i)[0];
    var += ds.point(i)[2] * ds.point(i)[2];
  }
  corr /= kM;
  var /= kM;
  const double sigma2 = 1.0 / (2.0 * kPi);
  CHECK(std::abs(corr) <= 3.0 * std::sqrt(sigma2 / kM));
  CHECK(std::abs(var - sigma2) <= 3.0 * sigma2 * std::sqrt(2.0 / kM));
  // any fixed hypothesis has error 1/2 on Be(1/2) labels
  std::uint64_t mistakes = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int h = ds.point(i)[0] + ds.point(i)[1] > 0.0 ? 1 : -1;
    if (h != ds.labels[i]) ++mistakes;
  }
  const double err = static_cast<double>(mistakes) / kM;
  CHECK(std::abs(err - 0.5) <= 3.0 * stats::binomial_sigma(0.5, kM));
}

TEST_CASE("monomial embedding") {
  SUBCASE("order and point values") {
    const auto spec = EmbeddingSpec::make(2, 2);
    CHECK(spec.monomial_count() == 6);
    const double origin[2] = {0.0, 0.0};
    CHECK(embed_monomials(spec, origin) == std::vector<double>{1, 0, 0, 0, 0, 0});
    // order [1, x1, x2, x1^2, x1 x2, x2^2]
    const double x[2] = {2.0, 3.0};
    CHECK(embed_monomials(spec, x) == std::vector<double>{1, 2, 3, 4, 6, 9});
  }
  SUBCASE("univariate powers") {
    const auto spec = EmbeddingSpec::make(1, 3);
    const double x[1] = {2.0};
    CHECK(embed_monomials(spec, x) == std::vector<double>{1, 2, 4, 8});
  }
  SUBCASE("padding") {
    const auto spec = EmbeddingSpec::make(1, 2, 7);
    const double x[1] = {3.0};
    CHECK(embed_monomials(spec, x) == std::vector<double>{1, 3, 9, 0, 0, 0, 0});
    CHECK_THROWS_AS(EmbeddingSpec::make(2, 2, 3), std::invalid_argument);
  }
  SUBCASE("monomial count is C(n + deg, n)") {
    CHECK(EmbeddingSpec::make(3, 4).monomial_count() == 35);
    CHECK(EmbeddingSpec::make(4, 3).monomial_count() == 35);
    CHECK(EmbeddingSpec::make(1, 10).monomial_count() == 11);
  }
  SUBCASE("sign compatibility with direct polynomial evaluation") {
    const auto spec = EmbeddingSpec::make(3, 3);
    RandomStream rng(42);
    std::vector<double> coeffs(spec.monomial_count());
    for (auto& c : coeffs) c = 2.0 * rng.next_uniform() - 1.0;
    int checked = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      double x[3] = {2.0 * rng.next_uniform() - 1.0, 2.0 * rng.next_uniform() - 1.0,
                     2.0 * rng.next_uniform() - 1.0};
      // direct evaluation as the oracle
      double direct = 0.0;
      for (std::size_t i = 0; i < spec.monomial_count(); ++i) {
        const auto e = spec.exponent(i);
        direct += coeffs[i] * std::pow(x[0], e[0]) * std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
      }
      if (std::abs(direct) < 1e-9) continue;
      const auto phi = embed_monomials(spec, x);
      double lifted = 0.0;
      for (std::size_t i = 0; i < phi.size(); ++i) lifted += coeffs[i] * phi[i];
      CHECK((direct < 0.0) == (lifted < 0.0));
      ++checked;
    }
    CHECK(checked > 9000);
  }
  SUBCASE("overflow raises range_error") {
    const auto spec = EmbeddingSpec::make(1, 600);
    const double x[1] = {1e10};
    CHECK_THROWS_AS(embed_monomials(spec, x), std::range_error);
  }
}

TEST_CASE("dataset file round-trip") {
  const auto params = test_mixture(3, 21);
  const Dataset ds = generate_mixture(params, 10000, 31337);
  const auto path = temp_file("clwe_roundtrip.clwf");
  write_dataset(ds, path);

  SUBCASE("bitwise round-trip") {
    const Dataset back = read_dataset(path);
    CHECK(back.xs == ds.xs);
    CHECK(back.labels == ds.labels);
    CHECK(back.manifest.to_json() == ds.manifest.to_json());
    // identical re-write produces identical bytes
    const auto path2 = temp_file("clwe_roundtrip2.clwf");
    write_dataset(back, path2);
    CHECK(slurp(path) == slurp(path2));
  }

  SUBCASE("manifest-only read") {
    const DatasetManifest man = read_manifest(path);
    CHECK(man.m == 10000);
    CHECK(man.mode == "planted");
    CHECK(man.gamma.value() == doctest::Approx(8.0));
  }

  SUBCASE("corrupted payload byte fails the checksum") {
    auto bytes = slurp(path);
    bytes[bytes.size() / 2] ^= 0x01;
    const auto bad = temp_file("clwe_corrupt.clwf");
    std::ofstream(bad, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    try {
      read_dataset(bad);
      FAIL("expected checksum failure");
    } catch (const IoError& e) {
      CHECK(e.kind() == IoErrorKind::checksum_mismatch);
    }
  }

  SUBCASE("truncated file") {
    auto bytes = slurp(path);
    bytes.resize(bytes.size() / 2);
    const auto bad = temp_file("clwe_truncated.clwf");
    std::ofstream(bad, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    try {
      read_dataset(bad);
      FAIL("expected truncation failure");
    } catch (const IoError& e) {
      CHECK(e.kind() == IoErrorKind::truncated);
    }
  }

  SUBCASE("bad magic and bad version") {
    auto bytes = slurp(path);
    auto bad = temp_file("clwe_magic.clwf");
    bytes[0] = 'X';
    std::ofstream(bad, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    try {
      read_dataset(bad);
      FAIL("expected magic failure");
    } catch (const IoError& e) {
      CHECK(e.kind() == IoErrorKind::bad_magic);
    }
    bytes = slurp(path);
    bytes[4] = 99;  // format_version low byte
    bad = temp_file("clwe_version.clwf");
    std::ofstream(bad, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    try {
      read_dataset(bad);
      FAIL("expected version failure");
    } catch (const IoError& e) {
      CHECK(e.kind() == IoErrorKind::bad_version);
    }
  }

  SUBCASE("missing file") {
    try {
      read_dataset(temp_file("clwe_does_not_exist.clwf"));
      FAIL("expected missing-artifact failure");
    } catch (const IoError& e) {
      CHECK(e.kind() == IoErrorKind::missing_artifact);
    }
  }
}

TEST_CASE("secret sidecar") {
  const auto params = test_mixture(5, 77);
  const auto& w = params.plus.base.w;
  const auto path = temp_file("clwe_secret.clwf");
  write_secret(w, 77, path);
  const auto back = read_secret(path);
  CHECK(back == w);
  // digest binds sidecar to dataset manifest
  const Dataset ds = generate_mixture(params, 100, 77);
  CHECK(ds.manifest.secret_digest.value() == secret_digest(back));
}

TEST_CASE("generation is deterministic and thread-count invariant") {
  const auto params = test_mixture(4, 55);
  const Dataset a = generate_mixture(params, 30000, 123, 1);
  const Dataset b = generate_mixture(params, 30000, 123, 4);
  const Dataset c = generate_mixture(params, 30000, 123, 1);
  CHECK(a.xs == b.xs);
  CHECK(a.labels == b.labels);
  CHECK(a.xs == c.xs);
  const Dataset n1 = generate_null(4, 30000, 5, 1);
  const Dataset n2 = generate_null(4, 30000, 5, 3);
  CHECK(n1.xs == n2.xs);
  // different seed, different data
  const Dataset d = generate_mixture(params, 30000, 124, 1);
  CHECK(a.xs != d.xs);
}

TEST_CASE("manifest json round-trip") {
  DatasetManifest man;
  man.mode = "planted";
  man.n = 4;
  man.m = 10;
  man.seed = 9;
  man.gamma = 8.0;
  man.beta = 0.02;
  man.out_beta = 0.04;
  man.alpha = 0.0125;
  man.c_plus = 0.0;
  man.c_minus = 0.5;
  man.secret_digest = "ab";
  const auto round = DatasetManifest::from_json(man.to_json());
  CHECK(round.to_json() == man.to_json());
  CHECK(round.gamma.value() == 8.0);
}
