#pragma once
// Kloosterman sums, the batched table a -> Kl(a; p), projective maps acting
// on P^1(F_p), configurations of map tuples, Sato-Tate constants A(mu) and the
// configuration sums  sum_a prod_i Kl(beta_i . a; p).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "divprog/errors.hpp"

namespace divprog {

// --- modular arithmetic ----------------------------------------------------

bool is_prime(std::uint64_t n);
std::uint64_t mod_reduce(std::int64_t a, std::uint64_t m);
// Inverse of a modulo m (gcd(a, m) must be 1).
std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t m);
// inv[x] for 1 <= x < p (inv[0] = 0) by inv[x] = -(p / x) inv[p mod x].
std::vector<std::uint32_t> inverse_table(std::uint32_t p);

// --- Kloosterman sums ------------------------------------------------------

// S(a, b; c) = sum_{x mod c, (x,c)=1} e((a x + b xbar) / c), real.
double kloosterman_sum(std::int64_t a, std::int64_t b, std::uint64_t c);
// Kl(a, b; c) = S(a, b; c) / sqrt(c).
double kl_normalized(std::int64_t a, std::int64_t b, std::uint64_t c);
// S(a, b; c) for every a mod c at once (one chirp DFT of length c).
std::vector<double> kloosterman_row(std::int64_t b, std::uint64_t c);

// Kl(a; p) = Kl(a, 1; p) for every residue a mod p (entry 0 is Kl(0; p)),
// computed as one length-p DFT of x -> e(xbar / p).
class KlTable {
 public:
  explicit KlTable(std::uint32_t p);

  std::uint32_t prime() const noexcept { return p_; }
  double operator[](std::uint32_t a) const { return values_[a]; }
  double at(std::int64_t a) const { return values_[mod_reduce(a, p_)]; }
  // Kl(a, n; p) for p not dividing a; covers p | n (Ramanujan sum -1/sqrt p).
  double twisted(std::int64_t a, std::int64_t n) const;
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<std::uint32_t>& inverses() const noexcept { return inverses_; }

 private:
  std::uint32_t p_;
  std::vector<double> values_;
  std::vector<std::uint32_t> inverses_;
};

KlTable kl_table(std::uint32_t p);

// max |Kl(a, b; p) - Kl(ab; p)| over the given pairs (p not dividing b).
double kl_scaled_discrepancy(std::uint32_t p,
                             std::span<const std::pair<std::int64_t, std::int64_t>> pairs);

// --- projective maps -------------------------------------------------------

class ReductionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Integer matrix [[a, b], [c, d]] with non-zero determinant.
struct ProjectiveMap {
  std::int64_t a = 1, b = 0, c = 0, d = 1;

  std::int64_t det() const { return a * d - b * c; }
  bool is_diagonal() const { return b == 0 && c == 0; }
  bool operator==(const ProjectiveMap&) const = default;

  static ProjectiveMap identity() { return {}; }
  static ProjectiveMap diagonal(std::int64_t x, std::int64_t y) { return {x, 0, 0, y}; }
};

ProjectiveMap parse_map(const std::string& text);  // "a,b,c,d"
std::string format_map(const ProjectiveMap& m);

struct P1Point {
  std::uint64_t value = 0;
  bool infinity = false;
  bool operator==(const P1Point&) const = default;
  static P1Point finite(std::uint64_t v) { return {v, false}; }
  static P1Point at_infinity() { return {0, true}; }
};

// Element of PGL_2(F_p), normalized so that c = 1, or c = 0 and d = 1.
struct Pgl2Element {
  std::uint64_t a = 1, b = 0, c = 0, d = 1;
  auto operator<=>(const Pgl2Element&) const = default;
};

Pgl2Element reduce(const ProjectiveMap& m, std::uint64_t p);  // throws ReductionError
Pgl2Element normalize(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d,
                      std::uint64_t p);

// z -> (a z + b) / (c z + d) with infinity -> a / c and zero denominators -> infinity.
P1Point apply_map(const Pgl2Element& g, P1Point z, std::uint64_t p);
P1Point apply_map(const ProjectiveMap& m, P1Point z, std::uint64_t p);

struct CanonicalDiagonal {
  std::int64_t alpha = 1;
  std::int64_t gamma1 = 1;
  std::int64_t gamma2 = 1;
  bool operator==(const CanonicalDiagonal&) const = default;
};

// gamma = alpha * diag(gamma1, gamma2) with gamma1 >= 1 and gcd(gamma1, gamma2) = 1.
CanonicalDiagonal canonical_diagonal(const ProjectiveMap& m);

// --- configurations and Sato-Tate constants ---------------------------------

struct Configuration {
  std::vector<int> multiplicities;  // non-increasing
  int kappa() const;
  int length() const { return static_cast<int>(multiplicities.size()); }
  bool mirror() const;
};

Configuration configuration_of(std::span<const Pgl2Element> maps);
std::string format_configuration(const Configuration& cfg);

// mu_ST((2 cos theta)^mu): 0 for odd mu, Catalan(mu / 2) for even mu.
std::uint64_t st_mult(int mu);
// (2/pi) int_0^pi (2 cos t)^mu sin^2 t dt by quadrature (independent check).
double st_mult_quadrature(int mu);
std::uint64_t a_constant(const Configuration& cfg);

struct ConfigurationSum {
  std::uint32_t p = 0;
  int kappa = 0;
  Configuration config;
  std::uint64_t a_value = 0;
  double value = 0.0;
  double ratio = 0.0;  // (S - A p) / sqrt(p)
  std::uint64_t excluded = 0;
};

// S(kappa, beta, p) = sum over a in F_p with every beta_i . a not in {0, inf}
// of prod_i Kl(beta_i . a; p).  The map list is sorted internally, so the
// value is exactly invariant under permutation.
ConfigurationSum configuration_sum(std::span<const ProjectiveMap> maps, const KlTable& table);
ConfigurationSum configuration_sum(std::span<const Pgl2Element> maps, const KlTable& table);

void to_json(nlohmann::json& j, const ConfigurationSum& s);

// theta(a) = arccos(Kl(a; p) / 2) for a = 1 .. p-1.
std::vector<double> sato_tate_angles(const KlTable& table);
// mu_ST([0, theta]) = (theta - sin theta cos theta) / pi.
double sato_tate_cdf(double theta);

}  // namespace divprog
