#include "clwe/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace clwe {

namespace {
using json = nlohmann::json;

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// C(n, k) as a double; exact while intermediate values stay below 2^53.
double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(v);
}

double multinomial(std::span<const std::uint16_t> parts) {
  double v = 1.0;
  int partial = 0;
  for (std::uint16_t p : parts) {
    partial += p;
    v *= binomial(partial, p);
  }
  return v;
}
}  // namespace

IntervalFamily IntervalFamily::build(double gamma, double out_beta, double alpha,
                                     double eps_tail) {
  if (!(gamma > 0.0) || !(out_beta > 0.0) || !(alpha > 0.0)) {
    throw std::invalid_argument("IntervalFamily: gamma, out_beta, alpha must be positive");
  }
  IntervalFamily fam;
  fam.gamma = gamma;
  fam.out_beta = out_beta;
  fam.alpha = alpha;
  const double def = HCLWESpec::default_alpha(gamma, out_beta);
  fam.default_alpha = std::abs(alpha - def) <= 1e-12 * def;
  const int k = TailCutoff::certify(Width(std::hypot(out_beta, gamma)), eps_tail).k_max;
  fam.k_min = -k;
  fam.k_max = k;
  return fam;
}

IntervalFamily IntervalFamily::build(const MixtureParams& params, double eps_tail) {
  return build(params.plus.base.gamma, params.plus.out_beta, params.plus.alpha.value(), eps_tail);
}

bool IntervalFamily::disjoint() const {
  if (default_alpha) return 5.0 * out_beta * out_beta < 3.0 * gamma * gamma;
  return gap() > 2.0 * alpha;
}

OraclePTF build_oracle(const IntervalFamily& family, std::vector<double> w, int d) {
  if (d < 1) throw std::invalid_argument("build_oracle: d >= 1 required");
  if (!family.disjoint()) {
    throw std::invalid_argument(
        "build_oracle: interval families overlap (requires gap > 2 alpha, i.e. "
        "out_beta^2 < (3/5) gamma^2)");
  }
  if (family.k_max < d) {
    throw std::invalid_argument("build_oracle: certified index range smaller than d");
  }
  OraclePTF oracle;
  oracle.w = std::move(w);
  oracle.d = d;
  oracle.family = family;
  oracle.roots.reserve(static_cast<std::size_t>(4 * d));
  for (long k = -d + 1; k <= d; ++k) {
    oracle.roots.push_back(0.5 * (family.center_plus(k - 1) + family.center_minus(k)));
    oracle.roots.push_back(0.5 * (family.center_minus(k) + family.center_plus(k)));
  }
  for (std::size_t i = 1; i < oracle.roots.size(); ++i) {
    if (!(oracle.roots[i - 1] < oracle.roots[i])) {
      throw std::logic_error("build_oracle: roots not strictly increasing");
    }
  }
  return oracle;
}

int OraclePTF::classify_projection(double t) const {
  const auto it = std::lower_bound(roots.begin(), roots.end(), t);
  if (it != roots.end() && *it == t) return 1;  // sign(0) = +1
  return ((it - roots.begin()) % 2 == 0) ? 1 : -1;
}

int OraclePTF::classify(std::span<const double> x) const {
  if (x.size() != w.size()) throw std::invalid_argument("OraclePTF::classify: dim(x) != n");
  return classify_projection(dot(w, x));
}

std::string OraclePTF::to_json() const {
  json j;
  j["format_version"] = 1;
  j["d"] = d;
  j["gamma"] = family.gamma;
  j["out_beta"] = family.out_beta;
  j["alpha"] = family.alpha;
  j["w"] = w;
  j["roots"] = roots;
  return j.dump();
}

OraclePTF OraclePTF::from_json(const std::string& text) {
  const json j = json::parse(text);
  const auto fam = IntervalFamily::build(j.at("gamma").get<double>(),
                                         j.at("out_beta").get<double>(),
                                         j.at("alpha").get<double>());
  OraclePTF oracle;
  oracle.w = j.at("w").get<std::vector<double>>();
  oracle.roots = j.at("roots").get<std::vector<double>>();
  oracle.d = j.at("d").get<int>();
  oracle.family = fam;
  return oracle;
}

std::vector<double> ptf_coefficients(const OraclePTF& oracle) {
  std::vector<long double> coeffs{1.0L};
  for (double r : oracle.roots) {
    coeffs.push_back(0.0L);
    for (std::size_t j = coeffs.size() - 1; j > 0; --j) {
      coeffs[j] = coeffs[j - 1] - static_cast<long double>(r) * coeffs[j];
    }
    coeffs[0] *= -static_cast<long double>(r);
  }
  return {coeffs.begin(), coeffs.end()};
}

std::vector<double> ltf_weights(const OraclePTF& oracle, const EmbeddingSpec& spec) {
  if (spec.degree < oracle.degree()) {
    throw std::invalid_argument("ltf_weights: embedding degree must be >= 4d");
  }
  if (spec.n != static_cast<int>(oracle.w.size())) {
    throw std::invalid_argument("ltf_weights: embedding dimension != oracle dimension");
  }
  const std::vector<double> coeffs = ptf_coefficients(oracle);
  std::vector<double> weights(spec.padded_dim, 0.0);
  const std::size_t mprime = spec.monomial_count();
  for (std::size_t i = 0; i < mprime; ++i) {
    const auto e = spec.exponent(i);
    int total = 0;
    double wpow = 1.0;
    for (int j = 0; j < spec.n; ++j) {
      total += e[static_cast<std::size_t>(j)];
      for (int p = 0; p < e[static_cast<std::size_t>(j)]; ++p) {
        wpow *= oracle.w[static_cast<std::size_t>(j)];
      }
    }
    if (total > oracle.degree()) continue;
    weights[i] = coeffs[static_cast<std::size_t>(total)] * multinomial(e) * wpow;
  }
  return weights;
}

double oracle_error_exact(const MixtureParams& params, int d) {
  if (d < 1) throw std::invalid_argument("oracle_error_exact: d >= 1 required");
  const IntervalFamily fam = IntervalFamily::build(params);
  if (!fam.disjoint()) throw std::invalid_argument("oracle_error_exact: families overlap");
  const DiscreteGaussian dg(Width(std::hypot(params.plus.out_beta, params.plus.base.gamma)));
  const double low = d <= dg.k_max() ? dg.upper_tail(d) : 0.0;
  const double high = d + 1 <= dg.k_max() ? dg.upper_tail(d + 1) : 0.0;
  return 0.5 * (low + high);
}

RegionClass conditional_error_class(const OraclePTF& oracle, std::span<const double> x) {
  const IntervalFamily& fam = oracle.family;
  const double t = dot(oracle.w, x);
  const double slots = t * fam.s2() / fam.gamma;
  const long k_plus = std::lround(slots);
  if (std::abs(t - fam.center_plus(k_plus)) <= fam.alpha) return RegionClass::always_correct;
  const long k_minus = std::lround(slots + 0.5 * fam.s2() / (fam.gamma * fam.gamma));
  if (std::abs(t - fam.center_minus(k_minus)) <= fam.alpha) {
    const bool protected_band = (k_minus >= -oracle.d + 1) && (k_minus <= oracle.d);
    return protected_band ? RegionClass::always_correct : RegionClass::always_wrong;
  }
  return RegionClass::off_support;
}

}  // namespace clwe
