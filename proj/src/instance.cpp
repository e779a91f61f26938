#include "clwe/instance.hpp"

#include <openssl/evp.h>

#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace clwe {

namespace {

using json = nlohmann::json;

constexpr char kMagic[4] = {'C', 'L', 'W', 'F'};
constexpr std::uint16_t kFormatVersion = 1;
constexpr std::uint64_t kShardSize = 65536;

// Standard CRC-32 (IEEE 802.3, reflected).
std::uint32_t crc32(std::span<const std::uint8_t> data, std::uint32_t crc = 0) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  crc = ~crc;
  for (std::uint8_t b : data) crc = table[(crc ^ b) & 0xffu] ^ (crc >> 8);
  return ~crc;
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError(IoErrorKind::missing_artifact, "cannot open " + path.string());
  }

  void read(void* dst, std::size_t len) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in_.gcount()) != len) {
      throw IoError(IoErrorKind::truncated, "unexpected end of file");
    }
  }

  std::uint16_t u16() {
    std::uint8_t b[2];
    read(b, 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }

  std::uint32_t u32() {
    std::uint8_t b[4];
    read(b, 4);
    return b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t{b[3]} << 24);
  }

 private:
  std::ifstream in_;
};

double f64_from_le(const std::uint8_t* b) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
  return std::bit_cast<double>(bits);
}

DatasetManifest parse_header(Reader& r) {
  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError(IoErrorKind::bad_magic, "not a CLWF file");
  }
  const std::uint16_t version = r.u16();
  if (version != kFormatVersion) {
    throw IoError(IoErrorKind::bad_version,
                  "unsupported format version " + std::to_string(version));
  }
  const std::uint32_t len = r.u32();
  std::string text(len, '\0');
  r.read(text.data(), len);
  return DatasetManifest::from_json(text);
}

std::string encode_records(const Dataset& ds) {
  std::string payload;
  payload.reserve(ds.size() * (static_cast<std::size_t>(ds.n) * 8 + 1));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.point(i)) put_f64(payload, v);
    payload.push_back(static_cast<char>(ds.labels[i]));
  }
  return payload;
}

void write_container(const std::filesystem::path& path, const DatasetManifest& manifest,
                     const std::string& payload) {
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kFormatVersion);
  const std::string mtext = manifest.to_json();
  put_u32(out, static_cast<std::uint32_t>(mtext.size()));
  out += mtext;
  out += payload;
  put_u32(out, crc32({reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size()}));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(IoErrorKind::io, "cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError(IoErrorKind::io, "write failed for " + path.string());
}

// Runs fn(shard_index, begin, count) over fixed-size shards, optionally on a
// small thread pool. Shard boundaries never depend on the thread count.
template <typename Fn>
void for_each_shard(std::uint64_t m, int threads, Fn&& fn) {
  const std::uint64_t shards = (m + kShardSize - 1) / kShardSize;
  if (threads <= 1 || shards <= 1) {
    for (std::uint64_t s = 0; s < shards; ++s) {
      const std::uint64_t begin = s * kShardSize;
      fn(s, begin, std::min(kShardSize, m - begin));
    }
    return;
  }
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t s = next.fetch_add(1);
      if (s >= shards) return;
      const std::uint64_t begin = s * kShardSize;
      fn(s, begin, std::min(kShardSize, m - begin));
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min<int>(threads, static_cast<int>(shards));
  pool.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace

MixtureParams MixtureParams::make(CLWEParams base, double out_beta, std::optional<double> alpha) {
  const double a = alpha.value_or(HCLWESpec::default_alpha(base.gamma, out_beta));
  const double g = base.gamma;
  if (!(5.0 * out_beta * out_beta < 3.0 * g * g)) {
    throw std::invalid_argument(
        "MixtureParams: support disjointness requires out_beta^2 < (3/5) gamma^2; got out_beta^2 = " +
        std::to_string(out_beta * out_beta) + " vs (3/5) gamma^2 = " + std::to_string(0.6 * g * g));
  }
  CLWEParams minus_base = base;
  return MixtureParams{HCLWESpec::make(std::move(base), 0.0, out_beta, a),
                       HCLWESpec::make(std::move(minus_base), 0.5, out_beta, a)};
}

EmbeddingSpec EmbeddingSpec::make(int n, int degree, std::size_t padded_dim) {
  if (n < 1) throw std::invalid_argument("EmbeddingSpec: n >= 1 required");
  if (degree < 0 || degree > 65535) throw std::invalid_argument("EmbeddingSpec: bad degree");
  // M' = C(n + degree, n), with a sanity cap so misconfigured calls fail
  // instead of exhausting memory.
  double count_est = 1.0;
  for (int i = 1; i <= n; ++i) count_est *= static_cast<double>(degree + i) / i;
  if (count_est > 2e7) throw std::invalid_argument("EmbeddingSpec: embedding dimension too large");

  EmbeddingSpec spec;
  spec.n = n;
  spec.degree = degree;
  std::vector<std::uint16_t> current(static_cast<std::size_t>(n), 0);
  // For each total degree, emit exponent tuples in descending lexicographic
  // order: recurse assigning the largest feasible power to the first slot.
  auto emit = [&](auto&& self, int slot, int remaining) -> void {
    if (slot == n - 1) {
      current[static_cast<std::size_t>(slot)] = static_cast<std::uint16_t>(remaining);
      spec.exponents.insert(spec.exponents.end(), current.begin(), current.end());
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[static_cast<std::size_t>(slot)] = static_cast<std::uint16_t>(e);
      self(self, slot + 1, remaining - e);
    }
  };
  for (int total = 0; total <= degree; ++total) emit(emit, 0, total);

  const std::size_t mprime = spec.monomial_count();
  spec.padded_dim = padded_dim == 0 ? mprime : padded_dim;
  if (spec.padded_dim < mprime) {
    throw std::invalid_argument("EmbeddingSpec: padded_dim < monomial count");
  }
  return spec;
}

void embed_monomials(const EmbeddingSpec& spec, std::span<const double> x, std::span<double> out) {
  if (x.size() != static_cast<std::size_t>(spec.n)) {
    throw std::invalid_argument("embed_monomials: dim(x) != n");
  }
  if (out.size() != spec.padded_dim) {
    throw std::invalid_argument("embed_monomials: output span has wrong dimension");
  }
  // Power table x_j^p for p <= degree.
  const std::size_t cols = static_cast<std::size_t>(spec.degree) + 1;
  std::vector<double> powers(static_cast<std::size_t>(spec.n) * cols);
  for (int j = 0; j < spec.n; ++j) {
    powers[j * cols] = 1.0;
    for (int p = 1; p <= spec.degree; ++p) {
      powers[j * cols + p] = powers[j * cols + p - 1] * x[static_cast<std::size_t>(j)];
    }
  }
  const std::size_t mprime = spec.monomial_count();
  for (std::size_t i = 0; i < mprime; ++i) {
    const auto e = spec.exponent(i);
    double v = 1.0;
    for (int j = 0; j < spec.n; ++j) v *= powers[static_cast<std::size_t>(j) * cols + e[j]];
    if (!std::isfinite(v)) throw std::range_error("embed_monomials: monomial overflowed");
    out[i] = v;
  }
  for (std::size_t i = mprime; i < spec.padded_dim; ++i) out[i] = 0.0;
}

std::vector<double> embed_monomials(const EmbeddingSpec& spec, std::span<const double> x) {
  std::vector<double> out(spec.padded_dim);
  embed_monomials(spec, x, out);
  return out;
}

std::string DatasetManifest::to_json() const {
  json j;
  j["format_version"] = format_version;
  j["mode"] = mode;
  j["n"] = n;
  j["m"] = m;
  j["seed"] = seed;
  auto set = [&j](const char* key, const auto& opt) {
    if (opt) j[key] = *opt;
  };
  set("gamma", gamma);
  set("beta", beta);
  set("out_beta", out_beta);
  set("alpha", alpha);
  set("c_plus", c_plus);
  set("c_minus", c_minus);
  set("embedding", embedding);
  set("secret_digest", secret_digest);
  return j.dump();
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(IoErrorKind::truncated, std::string("bad manifest: ") + e.what());
  }
  DatasetManifest man;
  man.format_version = j.at("format_version").get<int>();
  man.mode = j.at("mode").get<std::string>();
  man.n = j.at("n").get<int>();
  man.m = j.at("m").get<std::uint64_t>();
  man.seed = j.at("seed").get<std::uint64_t>();
  auto get = [&j](const char* key, auto& opt) {
    using T = typename std::decay_t<decltype(opt)>::value_type;
    if (j.contains(key)) opt = j.at(key).get<T>();
  };
  get("gamma", man.gamma);
  get("beta", man.beta);
  get("out_beta", man.out_beta);
  get("alpha", man.alpha);
  get("c_plus", man.c_plus);
  get("c_minus", man.c_minus);
  get("embedding", man.embedding);
  get("secret_digest", man.secret_digest);
  return man;
}

Dataset generate_mixture(const MixtureParams& params, std::uint64_t m, std::uint64_t seed,
                         int threads) {
  const HCLWESampler plus(params.plus);
  const HCLWESampler minus(params.minus);
  const int n = params.plus.base.n;

  Dataset ds;
  ds.n = n;
  ds.xs.resize(m * static_cast<std::uint64_t>(n));
  ds.labels.resize(m);
  for_each_shard(m, threads, [&](std::uint64_t shard, std::uint64_t begin, std::uint64_t count) {
    RandomStream rng = RandomStream::split(seed, shard);
    for (std::uint64_t i = begin; i < begin + count; ++i) {
      const bool positive = rng.next_uniform() < 0.5;
      ds.labels[i] = positive ? 1 : -1;
      std::span<double> row(ds.xs.data() + i * static_cast<std::uint64_t>(n),
                            static_cast<std::size_t>(n));
      (positive ? plus : minus).sample_into(rng, row);
    }
  });

  const auto& spec = params.plus;
  ds.manifest.mode = "planted";
  ds.manifest.n = n;
  ds.manifest.m = m;
  ds.manifest.seed = seed;
  ds.manifest.gamma = spec.base.gamma;
  ds.manifest.beta = spec.base.beta;
  ds.manifest.out_beta = spec.out_beta;
  ds.manifest.alpha = spec.alpha;
  ds.manifest.c_plus = params.plus.c;
  ds.manifest.c_minus = params.minus.c;
  ds.manifest.secret_digest = secret_digest(spec.base.w);
  return ds;
}

Dataset generate_null(int n, std::uint64_t m, std::uint64_t seed, int threads) {
  if (n < 1) throw std::invalid_argument("generate_null: n >= 1 required");
  Dataset ds;
  ds.n = n;
  ds.xs.resize(m * static_cast<std::uint64_t>(n));
  ds.labels.resize(m);
  const double sigma = 1.0 / std::sqrt(2.0 * std::numbers::pi_v<double>);
  for_each_shard(m, threads, [&](std::uint64_t shard, std::uint64_t begin, std::uint64_t count) {
    RandomStream rng = RandomStream::split(seed, shard);
    for (std::uint64_t i = begin; i < begin + count; ++i) {
      ds.labels[i] = rng.next_uniform() < 0.5 ? 1 : -1;
      double* row = ds.xs.data() + i * static_cast<std::uint64_t>(n);
      for (int jj = 0; jj < n; ++jj) row[jj] = rng.next_gaussian(sigma);
    }
  });
  ds.manifest.mode = "null";
  ds.manifest.n = n;
  ds.manifest.m = m;
  ds.manifest.seed = seed;
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_container(path, ds.manifest, encode_records(ds));
}

Dataset read_dataset(const std::filesystem::path& path) {
  Reader r(path);
  Dataset ds;
  ds.manifest = parse_header(r);
  ds.n = ds.manifest.n;
  const std::uint64_t m = ds.manifest.m;
  const std::size_t record = static_cast<std::size_t>(ds.n) * 8 + 1;
  std::vector<std::uint8_t> payload(m * record);
  r.read(payload.data(), payload.size());
  const std::uint32_t stored = r.u32();
  const std::uint32_t actual = crc32(payload);
  if (stored != actual) {
    throw IoError(IoErrorKind::checksum_mismatch, "payload checksum mismatch in " + path.string());
  }
  ds.xs.resize(m * static_cast<std::uint64_t>(ds.n));
  ds.labels.resize(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    const std::uint8_t* rec = payload.data() + i * record;
    for (int j = 0; j < ds.n; ++j) {
      ds.xs[i * static_cast<std::uint64_t>(ds.n) + j] = f64_from_le(rec + j * 8);
    }
    const auto label = static_cast<std::int8_t>(rec[record - 1]);
    if (label != 1 && label != -1) {
      throw IoError(IoErrorKind::checksum_mismatch, "invalid label byte");
    }
    ds.labels[i] = label;
  }
  return ds;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  Reader r(path);
  return parse_header(r);
}

std::string secret_digest(std::span<const double> w) {
  std::string bytes;
  bytes.reserve(w.size() * 8);
  for (double v : w) put_f64(bytes, v);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("secret_digest: EVP_Digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

void write_secret(std::span<const double> w, std::uint64_t seed, const std::filesystem::path& path) {
  DatasetManifest man;
  man.mode = "secret";
  man.n = static_cast<int>(w.size());
  man.m = 1;
  man.seed = seed;
  man.secret_digest = secret_digest(w);
  std::string payload;
  for (double v : w) put_f64(payload, v);
  write_container(path, man, payload);
}

std::vector<double> read_secret(const std::filesystem::path& path) {
  Reader r(path);
  const DatasetManifest man = parse_header(r);
  if (man.mode != "secret") {
    throw IoError(IoErrorKind::bad_magic, "not a secret sidecar: " + path.string());
  }
  std::vector<std::uint8_t> payload(static_cast<std::size_t>(man.n) * 8);
  r.read(payload.data(), payload.size());
  const std::uint32_t stored = r.u32();
  if (stored != crc32(payload)) {
    throw IoError(IoErrorKind::checksum_mismatch, "payload checksum mismatch in " + path.string());
  }
  std::vector<double> w(static_cast<std::size_t>(man.n));
  for (int i = 0; i < man.n; ++i) w[static_cast<std::size_t>(i)] = f64_from_le(payload.data() + i * 8);
  if (man.secret_digest && *man.secret_digest != secret_digest(w)) {
    throw IoError(IoErrorKind::checksum_mismatch, "secret digest mismatch in " + path.string());
  }
  return w;
}

}  // namespace clwe
