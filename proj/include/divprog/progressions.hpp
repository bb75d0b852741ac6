#pragma once
// Sums of d(n) or rho_f(n) in residue classes modulo a prime, their main
// terms and normalized errors E(a), the dual (Voronoi) side, the correlation
// sums B(a, b, Y) and the empirical and predicted (mixed) moments.

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>
#include <cstdint>
#include <ostream>
#include <vector>

#include "divprog/arith.hpp"
#include "divprog/bessel.hpp"
#include "divprog/kloosterman.hpp"
#include "divprog/stats.hpp"
#include "json.hpp"

namespace divprog {

struct ResidueErrorVector {
  Kind kind = Kind::Divisor;
  std::uint32_t p = 0;
  double X = 0.0;
  double Y = 0.0;                // p^2 / X
  double main_term = 0.0;        // M_*(X, p)
  double smoothed_total = 0.0;   // sum_n tau_*(n) w(n / X), summed directly
  double integral_term = 0.0;    // divisor kind: the log-integral part of M_d
  std::vector<double> S;         // S[a] for every residue a mod p
  std::vector<double> E;         // E[a] for a != 0; E[0] is NaN

  // |sum_a S[a] - smoothed_total|.
  double partition_discrepancy() const;
  // max_a |E(a)| sqrt(X) / (p d(p)^{5/2}).
  double uniform_bound_ratio() const;
};

// One pass over n in [w0 X, w1 X]; the table must reach w1 X.
ResidueErrorVector progression_sums(const CoefficientTable& table, double X, std::uint32_t p,
                                    const WeightProfile& w);

void write_residue_csv(std::ostream& out, const ResidueErrorVector& ev);

// --- Voronoi ---------------------------------------------------------------

struct VoronoiPlan {
  std::int64_t n_max = 0;
  double tail_bound = 0.0;
};

// Tail of (X/p^2)^{1/2} sum_{|n| > N} |tau(n)| |W(n/Y)| |Kl| with |Kl| <= 2,
// numerically up to the table end and by the decay certificate beyond.
double voronoi_tail(const TransformInterpolant& W, const CoefficientTable& coeffs, double X,
                    std::uint32_t p, std::int64_t n_max);
// Smallest N with tail <= target (or the largest usable N when unreachable).
VoronoiPlan voronoi_plan(const TransformInterpolant& W, const CoefficientTable& coeffs, double X,
                         std::uint32_t p, double target = 1e-4);

struct VoronoiResult {
  std::uint64_t a = 0;
  double lhs = 0.0;  // E(a) from direct summation
  double rhs = 0.0;  // truncated dual sum
  double diff = 0.0;
  double tail_bound = 0.0;
  std::int64_t n_max = 0;
};

// n_max = 0 selects the planned truncation.  An explicit n_max whose tail
// exceeds 1e-4 is rejected with the required value in the message.
VoronoiResult voronoi_check(const ResidueErrorVector& ev, const TransformInterpolant& W,
                            const CoefficientTable& coeffs, const KlTable& kl, std::uint64_t a,
                            std::int64_t n_max = 0);

// --- correlation sums and moments ------------------------------------------

// B_*(a, b, Y) = sum over n != 0 with |an|, |bn| < p/2 of
// tau(an) tau(bn) W(an/Y) W(bn/Y).
double correlation_sum_B(const CoefficientTable& coeffs, const TransformInterpolant& W,
                         std::int64_t a, std::int64_t b, double Y, std::uint32_t p);

// (1/p) sum_{a != 0} E(a)^kappa.
double empirical_moment(const ResidueErrorVector& ev, int kappa);

enum class Normalization { Analytic, Empirical };
std::string_view to_string(Normalization mode);
Normalization parse_normalization(std::string_view text);

struct MomentInputs {
  const ResidueErrorVector& ev;
  const CoefficientTable& coeffs;
  const TransformInterpolant& W;
  double c_f = 0.0;  // Rankin constant, used by the analytic cusp-form mode
};

// c_{*,w}: analytic (||w||^2 c_f, or the leading 2 ||w||^2 pi^-2 (log Y)^3)
// or empirical B(1, 1, Y) / Y.
double normalization_constant(const MomentInputs& in, Normalization mode);
// C_*(kappa) = c^{kappa/2} m_kappa.
double predicted_moment(int kappa, double c);

struct MixedMomentValue {
  double value = 0.0;
  std::uint64_t domain = 0;    // residues a with a, gamma.a not in {0, inf}
  std::uint64_t excluded = 0;  // p - domain
};

// Rejects p <= max(|entries|, |det|).
void check_mixed_prime(const ProjectiveMap& gamma, std::uint32_t p);
MixedMomentValue mixed_moment(const ResidueErrorVector& ev, const ProjectiveMap& gamma, int kappa,
                              int lambda);
// Pairs (E(a), E(gamma.a)) over the admissible domain.
std::vector<std::pair<double, double>> mixed_pairs(const ResidueErrorVector& ev,
                                                   const ProjectiveMap& gamma);

// c~_{*,w,gamma} for diagonal gamma (canonical gamma1, gamma2).
double correlation_constant(const MomentInputs& in, Normalization mode, const ProjectiveMap& gamma);
// G = rho_{gamma1 gamma2, *} / ||w||^2 * int w(gamma1 t) w(gamma2 t) dt; 0 if not diagonal.
double covariance_G(const CoefficientTable& coeffs, const WeightProfile& w, const ProjectiveMap& gamma);

// Sum over nu = kappa = lambda (mod 2) of
// nu! C(kappa, nu) C(lambda, nu) m_{kappa-nu} m_{lambda-nu} c^{(kappa+lambda)/2 - nu} ct^nu.
std::uint64_t diagonal_coefficient(int kappa, int lambda, int nu);
template <class T>
T diagonal_mixed_constant(int kappa, int lambda, const T& c, const T& ct) {
  T total(0);
  if ((kappa + lambda) % 2 != 0) return total;
  for (int nu = kappa % 2; nu <= std::min(kappa, lambda); nu += 2) {
    T term(static_cast<long long>(diagonal_coefficient(kappa, lambda, nu)));
    for (int j = 0; j < (kappa + lambda) / 2 - nu; ++j) term *= c;
    for (int j = 0; j < nu; ++j) term *= ct;
    total += term;
  }
  return total;
}

// C(kappa, lambda, gamma): C(kappa) C(lambda) for non-diagonal gamma, the
// diagonal sum otherwise.
double predicted_mixed(int kappa, int lambda, const ProjectiveMap& gamma, double c, double c_tilde);

using Rational = boost::rational<boost::multiprecision::cpp_int>;

// E[X^kappa Y^lambda] for a centered Gaussian pair with unit variances and
// covariance G, by enumerating every perfect matching of kappa + lambda
// labelled points.  kappa + lambda <= 16.
Rational gaussian_limit_moment(int kappa, int lambda, const Rational& G);

// --- reports ----------------------------------------------------------------

inline constexpr int kReportSchemaVersion = 1;

struct MomentReport {
  Kind kind = Kind::Divisor;
  std::uint32_t p = 0;
  double X = 0.0, Y = 0.0;
  Normalization mode = Normalization::Empirical;
  double c = 0.0;
  std::vector<int> kappas;
  std::vector<double> empirical;   // M(X, p; kappa)
  std::vector<double> predicted;   // C(kappa)
  std::vector<double> normalized;  // M / c^{kappa/2}
  std::vector<double> envelope;    // p^{-1/2} Y^{kappa/2} + Y^{-1/2}
  double uniform_bound_ratio = 0.0;
  DistributionSummary z_summary;   // of E(a) / sqrt(c)
};

MomentReport moment_report(const ResidueErrorVector& ev, int kappa_max, double c, Normalization mode);

struct MixedEntry {
  int kappa = 0, lambda = 0;
  double empirical = 0.0;
  double predicted = 0.0;
  double normalized = 0.0;  // empirical / c^{(kappa+lambda)/2}
};

struct MixedMomentReport {
  Kind kind = Kind::Divisor;
  std::uint32_t p = 0;
  double X = 0.0, Y = 0.0;
  ProjectiveMap gamma;
  bool diagonal = false;
  Normalization mode = Normalization::Empirical;
  double c = 0.0, c_tilde = 0.0;
  double covariance_G = 0.0;
  double empirical_correlation = 0.0;
  std::uint64_t domain = 0, excluded = 0;
  std::vector<MixedEntry> entries;
};

MixedMomentReport mixed_report(const ResidueErrorVector& ev, const ProjectiveMap& gamma, int kappa_max,
                               int lambda_max, double c, double c_tilde, double G, Normalization mode);

void to_json(nlohmann::json& j, const MomentReport& r);
void to_json(nlohmann::json& j, const MixedMomentReport& r);
void to_json(nlohmann::json& j, const VoronoiResult& r);

}  // namespace divprog
