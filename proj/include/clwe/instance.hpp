#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clwe/samplers.hpp"

namespace clwe {

// Labeled hard instance D = 1/2 (D_+, +1) + 1/2 (D_-, -1) built from a pair
// of non-overlapping hCLWE distributions at phases c_+ = 0 and c_- = 1/2,
// its null counterpart N(0, I/(2 pi)) x Be(1/2), the monomial embedding that
// lifts PTFs over R^n to halfspaces over R^M, and the dataset container
// format.

// I/O failures carry a stable reason so the CLI can map them to exit codes.
enum class IoErrorKind {
  bad_magic,
  bad_version,
  truncated,
  checksum_mismatch,
  missing_artifact,
  io,
};

class IoError : public std::runtime_error {
 public:
  IoError(IoErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  IoErrorKind kind() const noexcept { return kind_; }

 private:
  IoErrorKind kind_;
};

struct MixtureParams {
  HCLWESpec plus;   // c = 0
  HCLWESpec minus;  // c = 1/2

  // Shared base and truncation radius; enforces support disjointness
  // (out_beta^2 < (3/5) gamma^2). alpha defaults to the standard radius.
  static MixtureParams make(CLWEParams base, double out_beta,
                            std::optional<double> alpha = std::nullopt);
};

struct EmbeddingSpec {
  int n = 0;
  int degree = 0;
  std::size_t padded_dim = 0;              // M >= monomial_count()
  std::vector<std::uint16_t> exponents;    // monomial_count() x n, graded-lex

  // Graded lexicographic order: ascending total degree, ties broken by
  // lexicographically descending exponent tuples (x1 before x2, ...).
  static EmbeddingSpec make(int n, int degree, std::size_t padded_dim = 0);

  std::size_t monomial_count() const { return exponents.size() / static_cast<std::size_t>(n); }
  std::span<const std::uint16_t> exponent(std::size_t i) const {
    return {exponents.data() + i * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
  }
};

struct DatasetManifest {
  int format_version = 1;
  std::string mode;  // "planted" | "null"
  int n = 0;
  std::uint64_t m = 0;
  std::uint64_t seed = 0;
  // Present in planted mode.
  std::optional<double> gamma, beta, out_beta, alpha, c_plus, c_minus;
  std::optional<std::string> embedding;  // order tag, e.g. "grlex-v1:deg=8:M=45"
  std::optional<std::string> secret_digest;  // SHA-256 of the w payload bytes

  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text);
};

struct Dataset {
  int n = 0;
  std::vector<double> xs;           // m x n, row-major
  std::vector<std::int8_t> labels;  // in {-1, +1}
  DatasetManifest manifest;

  std::size_t size() const { return labels.size(); }
  std::span<const double> point(std::size_t i) const {
    return {xs.data() + i * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
  }
};

// Fair label coin, then a draw from the matching truncated pancake mixture.
// Work is cut into fixed-size blocks with per-block substreams, so the output
// is identical for every thread count.
Dataset generate_mixture(const MixtureParams& params, std::uint64_t m, std::uint64_t seed,
                         int threads = 1);

// x ~ N(0, I/(2 pi)), label ~ Be(1/2), independent.
Dataset generate_null(int n, std::uint64_t m, std::uint64_t seed, int threads = 1);

// out[i] = x^{alpha(i)} in the spec's order; entries past monomial_count()
// are zero. Throws std::range_error if a monomial overflows to non-finite.
void embed_monomials(const EmbeddingSpec& spec, std::span<const double> x, std::span<double> out);
std::vector<double> embed_monomials(const EmbeddingSpec& spec, std::span<const double> x);

// Container format (little-endian):
//   magic "CLWF" | u16 format_version | u32 manifest length | manifest JSON
//   | m records of (n f64 coordinates, 1 s8 label) | u32 CRC-32 of records.
void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

// Secret sidecar: same container, payload is the n coordinates of w (no
// label byte) and manifest mode "secret".
void write_secret(std::span<const double> w, std::uint64_t seed, const std::filesystem::path& path);
std::vector<double> read_secret(const std::filesystem::path& path);

// Lowercase hex SHA-256 of the little-endian f64 encoding of w.
std::string secret_digest(std::span<const double> w);

}  // namespace clwe
