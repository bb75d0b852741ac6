#include "divprog/progressions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <bit>
#include <functional>
#include <limits>
#include <numeric>
#include <numbers>
#include <string>

#include "divprog/errors.hpp"

namespace divprog {

namespace {

double integral(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-12, &err);
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

// --- residue sums ----------------------------------------------------------

double ResidueErrorVector::partition_discrepancy() const {
  long double s = 0.0L;
  for (double v : S) s += v;
  return static_cast<double>(std::abs(s - static_cast<long double>(smoothed_total)));
}

double ResidueErrorVector::uniform_bound_ratio() const {
  double m = 0.0;
  for (std::size_t a = 1; a < E.size(); ++a) m = std::max(m, std::abs(E[a]));
  return m * std::sqrt(X) / (p * std::pow(2.0, 2.5));
}

ResidueErrorVector progression_sums(const CoefficientTable& table, double X, std::uint32_t p,
                                    const WeightProfile& w) {
  if (!is_prime(p)) throw ValidationError("progression_sums: modulus " + std::to_string(p) + " is not prime");
  if (!(X >= 1.0)) throw ValidationError("progression_sums: X must be >= 1");
  const auto n_lo = static_cast<std::uint64_t>(std::max(1.0, std::ceil(w.w0() * X)));
  const auto n_hi = static_cast<std::uint64_t>(std::floor(w.w1() * X));
  if (n_hi > table.n_max()) {
    throw ValidationError("progression_sums: table reaches " + std::to_string(table.n_max()) + " but w1 X = " +
                        std::to_string(n_hi));
  }

  ResidueErrorVector ev;
  ev.kind = table.kind();
  ev.p = p;
  ev.X = X;
  ev.Y = static_cast<double>(p) * p / X;
  std::vector<long double> bins(p, 0.0L);
  long double total = 0.0L;
  std::uint32_t r = static_cast<std::uint32_t>(n_lo % p);
  for (std::uint64_t n = n_lo; n <= n_hi; ++n) {
    const long double v = static_cast<long double>(table.at(n)) * w(static_cast<double>(n) / X);
    bins[r] += v;
    total += v;
    if (++r == p) r = 0;
  }
  ev.smoothed_total = static_cast<double>(total);
  ev.S.assign(bins.begin(), bins.end());

  long double main = total / p;
  if (ev.kind == Kind::Divisor) {
    const double shift = std::log(X) + 2.0 * std::numbers::egamma - 2.0 * std::log(static_cast<double>(p));
    const double mass = integral([&](double t) { return w(t); }, w.w0(), w.w1());
    const double logmass = integral([&](double t) { return std::log(t) * w(t); }, w.w0(), w.w1());
    ev.integral_term = X / (static_cast<double>(p) * p) * (shift * mass + logmass);
    main -= ev.integral_term;
  }
  ev.main_term = static_cast<double>(main);

  const double scale = std::sqrt(X / p);
  ev.E.assign(p, std::numeric_limits<double>::quiet_NaN());
  for (std::uint32_t a = 1; a < p; ++a) ev.E[a] = static_cast<double>((bins[a] - main) / scale);
  return ev;
}

void write_residue_csv(std::ostream& out, const ResidueErrorVector& ev) {
  out << "p,X,kind,a,S,E\n";
  out.precision(17);
  for (std::uint32_t a = 1; a < ev.p; ++a) {
    out << ev.p << ',' << ev.X << ',' << to_string(ev.kind) << ',' << a << ',' << ev.S[a] << ',' << ev.E[a] << '\n';
  }
}

// --- Voronoi ---------------------------------------------------------------

namespace {

struct TailScan {
  std::int64_t limit = 0;      // last index summed numerically
  double certificate = 0.0;    // bound for |n| > limit
  double scale = 0.0;          // 2 (X/p^2)^{1/2}
};

TailScan tail_setup(const TransformInterpolant& W, const CoefficientTable& coeffs, double X, std::uint32_t p) {
  const double Y = static_cast<double>(p) * p / X;
  const double cut = std::max(W.y_cut(+1), W.y_cut(-1));
  TailScan t;
  t.limit = static_cast<std::int64_t>(std::min<double>(static_cast<double>(coeffs.n_max()), std::floor(Y * cut)));
  t.scale = 2.0 * std::sqrt(X / (static_cast<double>(p) * p));
  const double L = static_cast<double>(t.limit);
  if (L < Y) {
    t.certificate = std::numeric_limits<double>::infinity();
  } else {
    // |tau(n)| <= 2 sqrt(n) and |W(y)| <= C |y|^-5 for |y| >= 1.
    const int sides = W.kind() == Kind::Divisor ? 2 : 1;
    const auto& cert = W.certificate();
    t.certificate = sides * 2.0 * cert.C * std::pow(Y, 5.0) * std::pow(L, -3.5) / 3.5;
  }
  return t;
}

double dual_weight(const TransformInterpolant& W, const CoefficientTable& coeffs, std::int64_t n, double Y) {
  const double y = static_cast<double>(n) / Y;
  double s = std::abs(coeffs.at(static_cast<std::uint64_t>(n)) * W(y));
  if (W.kind() == Kind::Divisor) s += std::abs(coeffs.at(static_cast<std::uint64_t>(n)) * W(-y));
  return s;
}

}  // namespace

double voronoi_tail(const TransformInterpolant& W, const CoefficientTable& coeffs, double X, std::uint32_t p,
                    std::int64_t n_max) {
  const TailScan t = tail_setup(W, coeffs, X, p);
  const double Y = static_cast<double>(p) * p / X;
  if (n_max >= t.limit) {
    if (n_max > t.limit && static_cast<double>(n_max) >= Y) {
      const int sides = W.kind() == Kind::Divisor ? 2 : 1;
      return t.scale * sides * 2.0 * W.certificate().C * std::pow(Y, 5.0) *
             std::pow(static_cast<double>(n_max), -3.5) / 3.5;
    }
    return t.scale * t.certificate;
  }
  long double s = 0.0L;
  for (std::int64_t n = t.limit; n > n_max; --n) s += dual_weight(W, coeffs, n, Y);
  return t.scale * (static_cast<double>(s) + t.certificate);
}

VoronoiPlan voronoi_plan(const TransformInterpolant& W, const CoefficientTable& coeffs, double X, std::uint32_t p,
                         double target) {
  const TailScan t = tail_setup(W, coeffs, X, p);
  const double Y = static_cast<double>(p) * p / X;
  VoronoiPlan plan;
  long double s = t.certificate;
  if (t.scale * static_cast<double>(s) > target) {
    plan.n_max = t.limit;
    plan.tail_bound = t.scale * static_cast<double>(s);
    return plan;
  }
  std::int64_t n = t.limit;
  for (; n >= 1; --n) {
    const long double next = s + dual_weight(W, coeffs, n, Y);
    if (t.scale * static_cast<double>(next) > target) break;
    s = next;
  }
  plan.n_max = n;
  plan.tail_bound = t.scale * static_cast<double>(s);
  return plan;
}

VoronoiResult voronoi_check(const ResidueErrorVector& ev, const TransformInterpolant& W,
                            const CoefficientTable& coeffs, const KlTable& kl, std::uint64_t a, std::int64_t n_max) {
  constexpr double kTarget = 1e-4;
  if (kl.prime() != ev.p || coeffs.kind() != ev.kind || W.kind() != ev.kind) {
    throw ValidationError("voronoi_check: inputs built for different parameters");
  }
  if (a % ev.p == 0) throw ValidationError("voronoi_check: a must be prime to p");
  if (n_max < 0) throw ValidationError("voronoi_check: N_max must be >= 0");
  VoronoiResult r;
  r.a = a;
  if (n_max == 0) {
    const auto plan = voronoi_plan(W, coeffs, ev.X, ev.p, kTarget);
    if (plan.tail_bound > kTarget) {
      throw ValidationError("voronoi_check: coefficient table (n <= " + std::to_string(coeffs.n_max()) +
                            ") too short to reach tail bound 1e-4");
    }
    r.n_max = plan.n_max;
    r.tail_bound = plan.tail_bound;
  } else {
    if (static_cast<std::uint64_t>(n_max) > coeffs.n_max()) {
      throw ValidationError("voronoi_check: N_max exceeds the coefficient table");
    }
    r.n_max = n_max;
    r.tail_bound = voronoi_tail(W, coeffs, ev.X, ev.p, n_max);
    if (r.tail_bound > kTarget) {
      const auto plan = voronoi_plan(W, coeffs, ev.X, ev.p, kTarget);
      throw ValidationError("voronoi_check: N_max = " + std::to_string(n_max) + " leaves tail bound " +
                            std::to_string(r.tail_bound) + "; required N_max = " + std::to_string(plan.n_max));
    }
  }
  const auto ai = static_cast<std::int64_t>(a % ev.p);
  long double s = 0.0L;
  for (std::int64_t n = 1; n <= r.n_max; ++n) {
    const double y = static_cast<double>(n) / ev.Y;
    const double c = coeffs.at(static_cast<std::uint64_t>(n));
    s += c * W(y) * kl.twisted(ai, n);
    if (ev.kind == Kind::Divisor) s += c * W(-y) * kl.twisted(ai, -n);
  }
  r.lhs = ev.E[a % ev.p];
  r.rhs = std::sqrt(ev.X / (static_cast<double>(ev.p) * ev.p)) * static_cast<double>(s);
  r.diff = std::abs(r.lhs - r.rhs);
  return r;
}

// --- correlation sums ------------------------------------------------------

double correlation_sum_B(const CoefficientTable& coeffs, const TransformInterpolant& W, std::int64_t a,
                         std::int64_t b, double Y, std::uint32_t p) {
  if (a == 0 || b == 0) throw ValidationError("correlation_sum_B: a and b must be non-zero");
  if (std::gcd(a, b) != 1) throw ValidationError("correlation_sum_B: a and b must be coprime");
  if (!(Y > 0)) throw ValidationError("correlation_sum_B: Y must be positive");
  const std::int64_t m = std::max(std::abs(a), std::abs(b));
  const std::int64_t by_modulus = (static_cast<std::int64_t>(p) - 1) / 2 / m;
  const double cut = std::max(W.y_cut(+1), W.y_cut(-1));
  const auto by_support = static_cast<std::int64_t>(std::floor(Y * cut / static_cast<double>(m)));
  const std::int64_t n_top = std::min(by_modulus, by_support);
  if (static_cast<std::uint64_t>(n_top * m) > coeffs.n_max()) {
    throw ValidationError("correlation_sum_B: needs coefficients up to " + std::to_string(n_top * m));
  }
  long double s = 0.0L;
  for (std::int64_t n = 1; n <= n_top; ++n) {
    for (std::int64_t sn : {n, -n}) {
      const double ca = coeffs(a * sn), cb = coeffs(b * sn);
      if (ca == 0.0 || cb == 0.0) continue;
      s += ca * cb * W(static_cast<double>(a * sn) / Y) * W(static_cast<double>(b * sn) / Y);
    }
  }
  return static_cast<double>(s);
}

// --- moments ---------------------------------------------------------------

double empirical_moment(const ResidueErrorVector& ev, int kappa) {
  if (kappa < 1) throw ValidationError("empirical_moment: kappa must be >= 1");
  long double s = 0.0L;
  for (std::uint32_t a = 1; a < ev.p; ++a) s += ipow(ev.E[a], kappa);
  return static_cast<double>(s / ev.p);
}

std::string_view to_string(Normalization mode) {
  return mode == Normalization::Analytic ? "analytic" : "empirical";
}

Normalization parse_normalization(std::string_view text) {
  if (text == "analytic") return Normalization::Analytic;
  if (text == "empirical") return Normalization::Empirical;
  throw ValidationError("unknown normalization '" + std::string(text) + "' (expected analytic or empirical)");
}

double normalization_constant(const MomentInputs& in, Normalization mode) {
  const double norm2 = in.W.profile().norm_sq();
  if (mode == Normalization::Empirical) {
    return correlation_sum_B(in.coeffs, in.W, 1, 1, in.ev.Y, in.ev.p) / in.ev.Y;
  }
  if (in.ev.kind == Kind::CuspForm) {
    if (!(in.c_f > 0)) throw ValidationError("normalization_constant: analytic cusp-form mode needs c_f");
    return norm2 * in.c_f;
  }
  const double T = std::log(in.ev.Y);
  return 2.0 * norm2 / (std::numbers::pi * std::numbers::pi) * T * T * T;
}

double predicted_moment(int kappa, double c) {
  if (kappa < 1) throw ValidationError("predicted_moment: kappa must be >= 1");
  return std::pow(c, kappa / 2.0) * static_cast<double>(gaussian_moment(kappa));
}

void check_mixed_prime(const ProjectiveMap& gamma, std::uint32_t p) {
  const std::int64_t bound = std::max({std::abs(gamma.a), std::abs(gamma.b), std::abs(gamma.c), std::abs(gamma.d),
                                       std::abs(gamma.det())});
  if (gamma.det() == 0) throw ReductionError("mixed moment: singular map " + format_map(gamma));
  if (static_cast<std::int64_t>(p) <= bound) {
    throw ReductionError("mixed moment: p = " + std::to_string(p) + " must exceed " + std::to_string(bound) +
                         " for " + format_map(gamma));
  }
}

namespace {

template <class F>
std::uint64_t for_each_admissible(const ResidueErrorVector& ev, const ProjectiveMap& gamma, F&& f) {
  check_mixed_prime(gamma, ev.p);
  const Pgl2Element g = reduce(gamma, ev.p);
  std::uint64_t domain = 0;
  for (std::uint32_t a = 1; a < ev.p; ++a) {
    const P1Point b = apply_map(g, P1Point::finite(a), ev.p);
    if (b.infinity || b.value == 0) continue;
    ++domain;
    f(ev.E[a], ev.E[b.value]);
  }
  return domain;
}

}  // namespace

MixedMomentValue mixed_moment(const ResidueErrorVector& ev, const ProjectiveMap& gamma, int kappa, int lambda) {
  if (kappa < 0 || lambda < 0 || kappa + lambda < 1) throw ValidationError("mixed_moment: orders must be >= 0");
  long double s = 0.0L;
  MixedMomentValue v;
  v.domain = for_each_admissible(ev, gamma, [&](double x, double y) { s += ipow(x, kappa) * ipow(y, lambda); });
  v.excluded = ev.p - v.domain;
  v.value = static_cast<double>(s / ev.p);
  return v;
}

std::vector<std::pair<double, double>> mixed_pairs(const ResidueErrorVector& ev, const ProjectiveMap& gamma) {
  std::vector<std::pair<double, double>> out;
  for_each_admissible(ev, gamma, [&](double x, double y) { out.emplace_back(x, y); });
  return out;
}

double correlation_constant(const MomentInputs& in, Normalization mode, const ProjectiveMap& gamma) {
  if (!gamma.is_diagonal()) return 0.0;
  const auto cd = canonical_diagonal(gamma);
  if (mode == Normalization::Empirical) {
    return correlation_sum_B(in.coeffs, in.W, cd.gamma1, cd.gamma2, in.ev.Y, in.ev.p) / in.ev.Y;
  }
  const double rho = local_factor(cd.gamma1 * cd.gamma2, in.coeffs);
  const double ov = overlap_integral(in.W.profile(), static_cast<double>(cd.gamma1), static_cast<double>(cd.gamma2));
  if (in.ev.kind == Kind::CuspForm) {
    if (!(in.c_f > 0)) throw ValidationError("correlation_constant: analytic cusp-form mode needs c_f");
    return in.c_f * rho * ov;
  }
  const double T = std::log(in.ev.Y);
  return 2.0 / (std::numbers::pi * std::numbers::pi) * rho * ov * T * T * T;
}

double covariance_G(const CoefficientTable& coeffs, const WeightProfile& w, const ProjectiveMap& gamma) {
  if (!gamma.is_diagonal()) return 0.0;
  const auto cd = canonical_diagonal(gamma);
  const double rho = local_factor(cd.gamma1 * cd.gamma2, coeffs);
  return rho / w.norm_sq() * overlap_integral(w, static_cast<double>(cd.gamma1), static_cast<double>(cd.gamma2));
}

std::uint64_t diagonal_coefficient(int kappa, int lambda, int nu) {
  if (nu < 0 || nu > std::min(kappa, lambda)) return 0;
  if ((kappa - nu) % 2 != 0 || (lambda - nu) % 2 != 0) return 0;
  auto binom = [](int n, int k) {
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
  };
  std::uint64_t fact = 1;
  for (int i = 2; i <= nu; ++i) fact *= static_cast<std::uint64_t>(i);
  return fact * binom(kappa, nu) * binom(lambda, nu) * gaussian_moment(kappa - nu) * gaussian_moment(lambda - nu);
}

double predicted_mixed(int kappa, int lambda, const ProjectiveMap& gamma, double c, double c_tilde) {
  if (kappa < 0 || lambda < 0) throw ValidationError("predicted_mixed: orders must be >= 0");
  if (!gamma.is_diagonal()) {
    auto single = [&](int k) { return k == 0 ? 1.0 : predicted_moment(k, c); };
    return single(kappa) * single(lambda);
  }
  return diagonal_mixed_constant<double>(kappa, lambda, c, c_tilde);
}

namespace {

// counts[j] += number of perfect matchings of the points in `free` that
// use exactly j pairs joining an X-point (index < split) to a Y-point.
void enumerate_matchings(std::uint32_t free, int split, int cross, std::vector<std::uint64_t>& counts) {
  if (free == 0) {
    ++counts[static_cast<std::size_t>(cross)];
    return;
  }
  const int i = std::countr_zero(free);
  const std::uint32_t rest = free & ~(1u << i);
  for (std::uint32_t m = rest; m != 0; m &= m - 1) {
    const int j = std::countr_zero(m);
    const bool is_cross = (i < split) != (j < split);
    enumerate_matchings(rest & ~(1u << j), split, cross + (is_cross ? 1 : 0), counts);
  }
}

}  // namespace

Rational gaussian_limit_moment(int kappa, int lambda, const Rational& G) {
  if (kappa < 0 || lambda < 0 || kappa + lambda > 16) {
    throw ValidationError("gaussian_limit_moment: need 0 <= kappa, lambda and kappa + lambda <= 16");
  }
  const int n = kappa + lambda;
  if (n % 2 != 0) return Rational(0);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(n / 2 + 1), 0);
  enumerate_matchings(n == 0 ? 0u : (1u << n) - 1u, kappa, 0, counts);
  Rational total(0), power(1);
  for (std::size_t j = 0; j < counts.size(); ++j) {
    total += Rational(boost::multiprecision::cpp_int(counts[j])) * power;
    power *= G;
  }
  return total;
}

// --- reports ---------------------------------------------------------------

MomentReport moment_report(const ResidueErrorVector& ev, int kappa_max, double c, Normalization mode) {
  if (kappa_max < 1) throw ValidationError("moment_report: kappa_max must be >= 1");
  if (!(c > 0)) throw NumericIntegrityError("moment_report: normalization constant is not positive");
  MomentReport r;
  r.kind = ev.kind;
  r.p = ev.p;
  r.X = ev.X;
  r.Y = ev.Y;
  r.mode = mode;
  r.c = c;
  for (int k = 1; k <= kappa_max; ++k) {
    const double m = empirical_moment(ev, k);
    r.kappas.push_back(k);
    r.empirical.push_back(m);
    r.predicted.push_back(predicted_moment(k, c));
    r.normalized.push_back(m / std::pow(c, k / 2.0));
    r.envelope.push_back(std::pow(static_cast<double>(ev.p), -0.5) * std::pow(ev.Y, k / 2.0) + std::pow(ev.Y, -0.5));
  }
  r.uniform_bound_ratio = ev.uniform_bound_ratio();
  std::vector<double> z;
  z.reserve(ev.p - 1);
  const double s = std::sqrt(c);
  for (std::uint32_t a = 1; a < ev.p; ++a) z.push_back(ev.E[a] / s);
  r.z_summary = summarize(z);
  return r;
}

MixedMomentReport mixed_report(const ResidueErrorVector& ev, const ProjectiveMap& gamma, int kappa_max,
                               int lambda_max, double c, double c_tilde, double G, Normalization mode) {
  if (!(c > 0)) throw NumericIntegrityError("mixed_report: normalization constant is not positive");
  MixedMomentReport r;
  r.kind = ev.kind;
  r.p = ev.p;
  r.X = ev.X;
  r.Y = ev.Y;
  r.gamma = gamma;
  r.diagonal = gamma.is_diagonal();
  r.mode = mode;
  r.c = c;
  r.c_tilde = c_tilde;
  r.covariance_G = G;
  const auto pairs = mixed_pairs(ev, gamma);
  r.domain = pairs.size();
  r.excluded = ev.p - r.domain;
  if (pairs.size() >= 2) r.empirical_correlation = covariance_estimate(pairs).correlation();
  for (int k = 0; k <= kappa_max; ++k) {
    for (int l = 0; l <= lambda_max; ++l) {
      if (k + l == 0) continue;
      MixedEntry e;
      e.kappa = k;
      e.lambda = l;
      e.empirical = mixed_moment(ev, gamma, k, l).value;
      e.predicted = predicted_mixed(k, l, gamma, c, c_tilde);
      e.normalized = e.empirical / std::pow(c, (k + l) / 2.0);
      r.entries.push_back(e);
    }
  }
  return r;
}

void to_json(nlohmann::json& j, const MomentReport& r) {
  j = nlohmann::json{{"schema_version", kReportSchemaVersion},
                     {"kind", to_string(r.kind)},
                     {"p", r.p},
                     {"X", r.X},
                     {"Y", r.Y},
                     {"normalization", to_string(r.mode)},
                     {"c", r.c},
                     {"kappa", r.kappas},
                     {"empirical", r.empirical},
                     {"predicted", r.predicted},
                     {"normalized", r.normalized},
                     {"envelope", r.envelope},
                     {"uniform_bound_ratio", r.uniform_bound_ratio},
                     {"z_summary", r.z_summary}};
}

void to_json(nlohmann::json& j, const MixedMomentReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"kappa", e.kappa},
                       {"lambda", e.lambda},
                       {"empirical", e.empirical},
                       {"predicted", e.predicted},
                       {"normalized", e.normalized}});
  }
  j = nlohmann::json{{"schema_version", kReportSchemaVersion},
                     {"kind", to_string(r.kind)},
                     {"p", r.p},
                     {"X", r.X},
                     {"Y", r.Y},
                     {"gamma", format_map(r.gamma)},
                     {"diagonal", r.diagonal},
                     {"normalization", to_string(r.mode)},
                     {"c", r.c},
                     {"c_tilde", r.c_tilde},
                     {"covariance_G", r.covariance_G},
                     {"empirical_correlation", r.empirical_correlation},
                     {"domain", r.domain},
                     {"excluded", r.excluded},
                     {"entries", entries}};
}

void to_json(nlohmann::json& j, const VoronoiResult& r) {
  j = nlohmann::json{{"a", r.a},         {"lhs", r.lhs},         {"rhs", r.rhs},
                     {"diff", r.diff},   {"tail_bound", r.tail_bound}, {"n_max", r.n_max}};
}

}  // namespace divprog
