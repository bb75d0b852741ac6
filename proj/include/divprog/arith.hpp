#pragma once
// Arithmetic coefficient sequences: the divisor function d(n), Ramanujan's
// tau(n) for the weight-12 form Delta, and the normalized Hecke eigenvalues
// rho_f(n) = tau(n) / n^{11/2}.  Also the multiplicative local data entering
// correlation constants, and a binary cache for the tables.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace divprog {

using Int128 = __int128;

enum class Kind { Divisor, CuspForm };

std::string_view to_string(Kind kind);
Kind parse_kind(std::string_view text);  // "d" | "f"

inline constexpr int kDeltaWeight = 12;
inline constexpr std::uint64_t kDivisorCap = 10'000'000;
// Two-prime CRT reconstruction stays exact while |tau(n)| < 5e36, which holds
// comfortably up to 10^6.
inline constexpr std::uint64_t kCuspFormCap = 1'000'000;

class CoefficientTable {
 public:
  Kind kind() const noexcept { return kind_; }
  int weight() const noexcept { return weight_; }
  std::uint64_t n_max() const noexcept { return n_max_; }

  // tau_*(n) for any integer n with the sign-extension rules:
  // d(|n|) for the divisor kind, 0 for n <= 0 for the cusp-form kind.
  double operator()(std::int64_t n) const;

  // Positive index 1 <= n <= n_max.
  double at(std::uint64_t n) const {
    return kind_ == Kind::Divisor ? static_cast<double>(divisors_[n]) : rho_[n];
  }

  std::uint32_t divisor_count(std::uint64_t n) const;  // Divisor kind only
  Int128 tau(std::uint64_t n) const;                   // CuspForm kind only

  // tau_*(p^e) for a prime p <= n_max and any e >= 0; prime powers past the
  // table are produced by the Hecke recursion.
  double prime_power(std::uint64_t p, int e) const;

  // Raw little-endian payload words as written to the cache.
  std::vector<std::uint64_t> payload() const;
  std::uint64_t checksum() const;

  static CoefficientTable from_divisors(std::vector<std::uint32_t> counts);
  static CoefficientTable from_tau(std::vector<Int128> tau, int weight);

 private:
  Kind kind_ = Kind::Divisor;
  int weight_ = 0;
  std::uint64_t n_max_ = 0;
  std::vector<std::uint32_t> divisors_;
  std::vector<Int128> tau_;
  std::vector<double> rho_;
};

// Exact d(n) for 1 <= n <= n_max by a linear sieve.
CoefficientTable sieve_divisor(std::uint64_t n_max,
                               std::uint64_t cap = kDivisorCap);

// Exact tau(1..n_max) (index 0 holds 0) as the q-expansion of q * eta^24,
// computed as the eighth power of the sparse Jacobi series for eta^3.
std::vector<Int128> compute_tau(std::uint64_t n_max,
                                 std::uint64_t cap = kCuspFormCap);

// rho_f(n) = tau(n) / n^{(k-1)/2}.  Only k = 12 is supported.
CoefficientTable normalize_hecke(std::vector<Int128> tau, int weight);

CoefficientTable build_table(Kind kind, std::uint64_t n_max);

// prod over p^alpha || |a| of (tau(p^alpha) - tau(p) tau(p^{alpha-1}) / (p+1)),
// with rho_{a,d} = rho_{-a,d} and rho_{a,f} = 0 for a < 0.
double local_factor(std::int64_t a, const CoefficientTable& table);

struct SeriesValue {
  double value = 0.0;
  double error_estimate = 0.0;  // truncation tail bound
};

// F_{*,a,b}(s) evaluated as F_*(s) times the Euler correction at the primes
// dividing ab.  F_*(s) itself is the Dirichlet series truncated at `terms`
// with tail bound 10 * N^{1-s} log^3 N.
SeriesValue euler_factor_series(std::int64_t a, std::int64_t b, double s,
                                const CoefficientTable& table,
                                std::uint64_t terms);

// sum_{0 < |n| <= N} tau_*(an) tau_*(bn) |n|^{-s}.  Needs N <= n_max; values
// tau_*(an) past the table are assembled multiplicatively.
double truncated_dirichlet(std::int64_t a, std::int64_t b, double s,
                           std::uint64_t terms, const CoefficientTable& table);

struct RankinEstimate {
  double c_f = 0.0;
  double residual = 0.0;  // rms relative misfit over the fit window
  bool low_confidence = false;
  std::uint64_t terms = 0;
};

// Least-squares slope of M -> sum_{n<=M} rho_f(n)^2 over M in [N/2, N].
RankinEstimate rankin_constant(const CoefficientTable& table, std::uint64_t terms);

inline constexpr double kRankinResidualThreshold = 0.02;

// Cache file: magic, kind, weight, n_max, checksum, then the payload words.
inline constexpr std::uint32_t kCacheFormatVersion = 1;
void save_table(const CoefficientTable& table, const std::filesystem::path& path);
// Empty when the file is absent, corrupt, or built for other parameters.
std::optional<CoefficientTable> load_table(const std::filesystem::path& path,
                                           Kind kind, int weight,
                                           std::uint64_t n_max);
CoefficientTable load_or_build(const std::filesystem::path& cache_dir, Kind kind,
                               std::uint64_t n_max);

// Trial-division factorization; pairs (prime, exponent) in increasing order.
std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n);

}  // namespace divprog
