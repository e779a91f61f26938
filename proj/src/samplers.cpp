#include "clwe/samplers.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace clwe {

namespace {
constexpr double kPi = std::numbers::pi_v<double>;

double frac_mod1(double x) {
  double z = x - std::floor(x);
  if (z >= 1.0) z = 0.0;  // maps exact 1.0 (from rounding) back into [0, 1)
  return z;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}
}  // namespace

CLWEParams CLWEParams::make(int n, double gamma, double beta, std::vector<double> w) {
  if (n < 1) throw std::invalid_argument("CLWEParams: n >= 1 required");
  if (!(std::isfinite(gamma) && gamma > 0.0)) throw std::invalid_argument("CLWEParams: gamma > 0 required");
  if (!(std::isfinite(beta) && beta > 0.0)) throw std::invalid_argument("CLWEParams: beta > 0 required");
  if (beta > gamma) throw std::invalid_argument("CLWEParams: beta <= gamma required");
  if (w.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("CLWEParams: dim(w) != n");
  double norm2 = 0.0;
  for (double wi : w) norm2 += wi * wi;
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12) {
    throw std::invalid_argument("CLWEParams: w must be a unit vector (||w|| = 1 within 1e-12)");
  }
  return CLWEParams{n, gamma, beta, std::move(w)};
}

CLWEParams CLWEParams::sample(int n, RandomStream& rng, double gamma, double beta) {
  if (gamma == 0.0) gamma = 2.0 * std::sqrt(static_cast<double>(n));
  if (beta == 0.0) beta = 1.0 / static_cast<double>(n);
  return make(n, gamma, beta, sample_secret_direction(n, rng));
}

HCLWESpec HCLWESpec::make(CLWEParams base, double c, double out_beta,
                          std::optional<double> alpha) {
  if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("HCLWESpec: c in [0, 1) required");
  if (!(std::isfinite(out_beta) && out_beta > 0.0)) {
    throw std::invalid_argument("HCLWESpec: out_beta > 0 required");
  }
  if (alpha) {
    if (!(*alpha > 0.0)) throw std::invalid_argument("HCLWESpec: alpha > 0 required");
    const double g = base.gamma;
    if (!(5.0 * out_beta * out_beta < 3.0 * g * g)) {
      throw std::invalid_argument(
          "HCLWESpec: truncated variant requires out_beta^2 < (3/5) gamma^2 "
          "(out_beta^2 = " + std::to_string(out_beta * out_beta) +
          ", (3/5) gamma^2 = " + std::to_string(0.6 * g * g) + ")");
    }
  }
  return HCLWESpec{std::move(base), c, out_beta, alpha};
}

double HCLWESpec::default_alpha(double gamma, double out_beta) {
  return 0.1 * gamma / (gamma * gamma + out_beta * out_beta);
}

double HCLWESpec::mixture_width() const { return std::hypot(out_beta, base.gamma); }

double HCLWESpec::component_width() const { return out_beta / mixture_width(); }

double HCLWESpec::component_center(long k) const {
  const double s2 = out_beta * out_beta + base.gamma * base.gamma;
  return base.gamma * static_cast<double>(k) / s2 - c / base.gamma;
}

double HCLWESpec::spacing() const {
  const double s2 = out_beta * out_beta + base.gamma * base.gamma;
  return base.gamma / s2;
}

RejectionConfig RejectionConfig::make(double delta, double c) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("RejectionConfig: delta in (0, 1) required");
  if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("RejectionConfig: c in [0, 1) required");
  RejectionConfig cfg{delta, c, 0.0};
  // sup of g0 sits where z + c wraps to an integer; verify on a grid rather
  // than assuming it.
  cfg.m_bound = theta_mass(Width(delta));
  const int grid = 10000;
  for (int i = 0; i < grid; ++i) {
    const double z = (i + 0.5) / grid;
    if (cfg.g0(z) > cfg.m_bound * (1.0 + 1e-12)) {
      throw std::logic_error("RejectionConfig: M is not an upper bound of g0");
    }
  }
  if (!(cfg.m_bound < 4.0)) throw std::logic_error("RejectionConfig: M < 4 violated");
  return cfg;
}

double RejectionConfig::g0(double z) const {
  const Width d(delta);
  const int reach = TailCutoff::certify(d).k_max + 1;
  const long k0 = std::lround(-(z + c));
  double acc = 0.0;
  for (long k = k0 - reach; k <= k0 + reach; ++k) {
    acc += rho(d, z + static_cast<double>(k) + c);
  }
  return acc;
}

double RejectionConfig::acceptance_rate(const CLWEParams& p) const {
  const double sp = std::sqrt(p.beta * p.beta + delta * delta + p.gamma * p.gamma);
  return delta * theta_mass(Width(sp)) / (sp * m_bound);
}

std::vector<double> sample_secret_direction(int n, RandomStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_secret_direction: n >= 1 required");
  std::vector<double> w(n);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& wi : w) {
      wi = rng.next_gaussian();
      norm2 += wi * wi;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& wi : w) wi *= inv;
  return w;
}

CLWESample sample_clwe(const CLWEParams& p, RandomStream& rng) {
  const double sigma_y = 1.0 / std::sqrt(2.0 * kPi);
  std::vector<double> y(p.n);
  for (auto& yi : y) yi = rng.next_gaussian(sigma_y);
  const double e = rng.next_gaussian(p.beta / std::sqrt(2.0 * kPi));
  const double z = frac_mod1(p.gamma * dot(y, p.w) + e);
  return CLWESample{std::move(y), z};
}

double clwe_density(const CLWEParams& p, std::span<const double> y, double z) {
  if (!(z >= 0.0 && z < 1.0)) throw std::domain_error("clwe_density: z in [0, 1) required");
  if (y.size() != static_cast<std::size_t>(p.n)) throw std::domain_error("clwe_density: dim(y) != n");
  const Width b(p.beta);
  const double t = p.gamma * dot(y, p.w);
  const int reach = TailCutoff::certify(b).k_max + 1;
  const long k0 = std::lround(t - z);
  double wrapped = 0.0;
  for (long k = k0 - reach; k <= k0 + reach; ++k) {
    wrapped += rho(b, z + static_cast<double>(k) - t);
  }
  return rho(Width(1.0), y) * wrapped / p.beta;
}

HCLWESampler::HCLWESampler(HCLWESpec spec)
    : spec_(std::move(spec)),
      component_(Width(spec_.mixture_width())),
      comp_sigma_(Width(spec_.component_width()).sigma()) {}

void HCLWESampler::sample_into(RandomStream& rng, std::span<double> out) const {
  const auto& w = spec_.base.w;
  const int n = spec_.base.n;
  if (out.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("HCLWESampler: output span has wrong dimension");
  }
  const int k = component_.sample(rng);
  const double mu = spec_.component_center(k);
  double t;
  if (spec_.alpha) {
    const double a = *spec_.alpha;
    do {
      t = mu + rng.next_gaussian(comp_sigma_);
    } while (std::abs(t - mu) > a);
  } else {
    t = mu + rng.next_gaussian(comp_sigma_);
  }
  const double sigma = 1.0 / std::sqrt(2.0 * kPi);
  double g_dot_w = 0.0;
  for (int i = 0; i < n; ++i) {
    out[i] = rng.next_gaussian(sigma);
    g_dot_w += out[i] * w[i];
  }
  const double shift = t - g_dot_w;
  for (int i = 0; i < n; ++i) out[i] += shift * w[i];
}

std::vector<double> HCLWESampler::sample(RandomStream& rng) const {
  std::vector<double> x(spec_.base.n);
  sample_into(rng, x);
  return x;
}

std::vector<double> sample_hclwe_direct(const HCLWESpec& spec, RandomStream& rng) {
  if (spec.alpha) throw std::invalid_argument("sample_hclwe_direct: spec must be untruncated");
  return HCLWESampler(spec).sample(rng);
}

std::vector<double> sample_nhclwe(const HCLWESpec& spec, RandomStream& rng) {
  if (!spec.alpha) throw std::invalid_argument("sample_nhclwe: spec.alpha required");
  return HCLWESampler(spec).sample(rng);
}

ProjectionDensity::ProjectionDensity(HCLWESpec spec, bool truncated)
    : spec_(std::move(spec)), truncated_(truncated) {
  if (truncated_ && !spec_.alpha) {
    throw std::invalid_argument("ProjectionDensity: truncated variant requires spec.alpha");
  }
  const double s = spec_.mixture_width();
  mass_ = theta_mass(Width(s));
  spacing_ = spec_.spacing();
  comp_width_ = spec_.component_width();
  const double a = spec_.alpha ? *spec_.alpha : 0.0;
  renorm_ = truncated_ ? 1.0 / std::erf(std::sqrt(kPi) * a / comp_width_) : 1.0;
  // components further than `reach` slots from t contribute below 1e-18
  const double comp_reach = comp_width_ * std::sqrt(std::log(2.0 / 1e-18) / kPi);
  reach_ = std::lround(std::ceil((comp_reach + a) / spacing_)) + 1;
}

double ProjectionDensity::operator()(double t) const {
  const Width sw(spec_.mixture_width());
  const Width rw(comp_width_);
  const double a = spec_.alpha ? *spec_.alpha : 0.0;
  const long k0 = std::lround((t + spec_.c / spec_.base.gamma) / spacing_);
  double acc = 0.0;
  for (long k = k0 - reach_; k <= k0 + reach_; ++k) {
    const double mu = spec_.component_center(k);
    if (truncated_ && std::abs(t - mu) > a) continue;
    acc += rho(sw, static_cast<double>(k)) * renorm_ * rho(rw, t - mu);
  }
  return acc / (mass_ * comp_width_);
}

double hclwe_projection_density(const HCLWESpec& spec, double t) {
  return ProjectionDensity(spec, false)(t);
}

double nhclwe_projection_density(const HCLWESpec& spec, double t) {
  return ProjectionDensity(spec, true)(t);
}

std::optional<std::vector<double>> reject_transform(const CLWEParams& p, const RejectionConfig& cfg,
                                                    const CLWESample& input, RandomStream& rng) {
  if (input.y.size() != static_cast<std::size_t>(p.n)) {
    throw std::invalid_argument("reject_transform: dim(y) != n");
  }
  if (rng.next_uniform() < cfg.accept_prob(input.z)) return input.y;
  return std::nullopt;
}

std::optional<std::vector<double>> reject_transform_null(const RejectionConfig& cfg,
                                                         std::span<const double> y, double z,
                                                         RandomStream& rng) {
  if (rng.next_uniform() < cfg.accept_prob(z)) return std::vector<double>(y.begin(), y.end());
  return std::nullopt;
}

}  // namespace clwe
