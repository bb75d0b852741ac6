#include "divprog/arith.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "divprog/errors.hpp"
#include "ntt.hpp"

namespace divprog {

namespace {

constexpr char kCacheMagic[8] = {'D', 'V', 'P', 'R', 'G', 'T', 'B', 'L'};

std::uint64_t fnv1a(const std::vector<std::uint64_t>& words) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint64_t w : words) {
    for (int i = 0; i < 8; ++i) {
      h ^= (w >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

void put_le(std::ostream& out, std::uint64_t w) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((w >> (8 * i)) & 0xffU);
  out.write(buf, 8);
}

bool get_le(std::istream& in, std::uint64_t& w) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) return false;
  w = 0;
  for (int i = 0; i < 8; ++i) w |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return true;
}

}  // namespace

std::string_view to_string(Kind kind) {
  return kind == Kind::Divisor ? "d" : "f";
}

Kind parse_kind(std::string_view text) {
  if (text == "d") return Kind::Divisor;
  if (text == "f") return Kind::CuspForm;
  throw ValidationError("unknown kind '" + std::string(text) + "' (expected d or f)");
}

std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n) {
  std::vector<std::pair<std::uint64_t, int>> out;
  for (std::uint64_t q = 2; q * q <= n; q += (q == 2 ? 1 : 2)) {
    if (n % q) continue;
    int e = 0;
    while (n % q == 0) {
      n /= q;
      ++e;
    }
    out.emplace_back(q, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

// ---------------------------------------------------------------------------
// CoefficientTable

double CoefficientTable::operator()(std::int64_t n) const {
  if (n == 0) return 0.0;
  if (kind_ == Kind::CuspForm && n < 0) return 0.0;
  const auto m = static_cast<std::uint64_t>(n < 0 ? -n : n);
  if (m > n_max_) throw CapacityError("coefficient index " + std::to_string(m) +
                                      " beyond table size " + std::to_string(n_max_));
  return at(m);
}

std::uint32_t CoefficientTable::divisor_count(std::uint64_t n) const {
  if (kind_ != Kind::Divisor) throw ValidationError("divisor_count on a cusp-form table");
  return divisors_.at(n);
}

Int128 CoefficientTable::tau(std::uint64_t n) const {
  if (kind_ != Kind::CuspForm) throw ValidationError("tau on a divisor table");
  return tau_.at(n);
}

double CoefficientTable::prime_power(std::uint64_t p, int e) const {
  if (e == 0) return 1.0;
  if (kind_ == Kind::Divisor) return static_cast<double>(e + 1);
  if (p > n_max_) throw CapacityError("prime " + std::to_string(p) + " beyond table");
  // rho(p^{j+1}) = rho(p) rho(p^j) - rho(p^{j-1})
  const double rp = rho_[p];
  double prev = 1.0;
  double cur = rp;
  std::uint64_t pw = p;
  for (int j = 1; j < e; ++j) {
    const bool in_table = pw <= n_max_ / p;
    pw = in_table ? pw * p : n_max_ + 1;
    const double next = in_table ? rho_[pw] : rp * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<std::uint64_t> CoefficientTable::payload() const {
  std::vector<std::uint64_t> words;
  if (kind_ == Kind::Divisor) {
    words.reserve(n_max_);
    for (std::uint64_t n = 1; n <= n_max_; ++n) words.push_back(divisors_[n]);
  } else {
    words.reserve(2 * n_max_);
    for (std::uint64_t n = 1; n <= n_max_; ++n) {
      const auto u = static_cast<unsigned __int128>(tau_[n]);
      words.push_back(static_cast<std::uint64_t>(u));
      words.push_back(static_cast<std::uint64_t>(u >> 64));
    }
  }
  return words;
}

std::uint64_t CoefficientTable::checksum() const { return fnv1a(payload()); }

CoefficientTable CoefficientTable::from_divisors(std::vector<std::uint32_t> counts) {
  CoefficientTable t;
  t.kind_ = Kind::Divisor;
  t.n_max_ = counts.empty() ? 0 : counts.size() - 1;
  t.divisors_ = std::move(counts);
  return t;
}

CoefficientTable CoefficientTable::from_tau(std::vector<Int128> tau, int weight) {
  CoefficientTable t;
  t.kind_ = Kind::CuspForm;
  t.weight_ = weight;
  t.n_max_ = tau.empty() ? 0 : tau.size() - 1;
  t.rho_.assign(tau.size(), 0.0);
  const long double half = (weight - 1) / 2.0L;
  for (std::size_t n = 1; n < tau.size(); ++n) {
    t.rho_[n] = static_cast<double>(static_cast<long double>(tau[n]) /
                                    std::pow(static_cast<long double>(n), half));
  }
  t.tau_ = std::move(tau);
  return t;
}

// ---------------------------------------------------------------------------
// Generation

CoefficientTable sieve_divisor(std::uint64_t n_max, std::uint64_t cap) {
  if (n_max < 1) throw ValidationError("sieve_divisor: n_max must be >= 1");
  if (n_max > cap) {
    throw CapacityError("divisor table of size " + std::to_string(n_max) +
                        " exceeds budget " + std::to_string(cap));
  }
  std::vector<std::uint32_t> d(n_max + 1, 0);
  std::vector<std::uint8_t> spf_exp(n_max + 1, 0);
  std::vector<std::uint32_t> primes;
  d[1] = 1;
  for (std::uint64_t i = 2; i <= n_max; ++i) {
    if (d[i] == 0) {
      d[i] = 2;
      spf_exp[i] = 1;
      primes.push_back(static_cast<std::uint32_t>(i));
    }
    for (std::uint32_t p : primes) {
      const std::uint64_t ip = i * p;
      if (ip > n_max) break;
      if (i % p == 0) {
        spf_exp[ip] = static_cast<std::uint8_t>(spf_exp[i] + 1);
        d[ip] = d[i] / (spf_exp[i] + 1) * (spf_exp[i] + 2);
        break;
      }
      spf_exp[ip] = 1;
      d[ip] = d[i] * 2;
    }
  }
  return CoefficientTable::from_divisors(std::move(d));
}

std::vector<Int128> compute_tau(std::uint64_t n_max, std::uint64_t cap) {
  using detail::u64;
  if (n_max < 1) throw ValidationError("compute_tau: n_max must be >= 1");
  if (n_max > cap) {
    throw CapacityError("tau table of size " + std::to_string(n_max) +
                        " exceeds budget " + std::to_string(cap));
  }
  const std::size_t terms = n_max;  // coefficients of q^0 .. q^{n_max-1}

  auto eighth_power = [&](detail::NttPrime prime) {
    detail::Ntt ntt(prime);
    const auto& f = ntt.field();
    // eta^3 / q^{1/8} = sum_m (-1)^m (2m+1) q^{m(m+1)/2}
    std::vector<u64> poly(terms, 0);
    for (std::uint64_t m = 0; m * (m + 1) / 2 < terms; ++m) {
      const u64 mag = f.to(2 * m + 1);
      poly[m * (m + 1) / 2] = (m % 2) ? f.sub(0, mag) : mag;
    }
    for (int i = 0; i < 3; ++i) poly = ntt.square(poly, terms);
    for (auto& x : poly) x = f.from(x);
    return poly;
  };

  const auto ra = eighth_power(detail::kNttPrimeA);
  const auto rb = eighth_power(detail::kNttPrimeB);

  using u128 = unsigned __int128;
  const u64 pa = detail::kNttPrimeA.modulus;
  const u64 pb = detail::kNttPrimeB.modulus;
  const detail::Montgomery fb(pb);
  const u64 pa_inv_b = fb.from(fb.pow(fb.to(pa % pb), pb - 2));
  const u128 modulus = static_cast<u128>(pa) * pb;
  const u128 half = modulus / 2;

  std::vector<Int128> tau(n_max + 1, 0);
  for (std::size_t i = 0; i < terms; ++i) {
    // x = ra + pa * ((rb - ra) * pa^{-1} mod pb)
    const u64 diff = fb.sub(rb[i], ra[i] % pb);
    const u64 k = static_cast<u64>(static_cast<u128>(diff) * pa_inv_b % pb);
    const u128 x = static_cast<u128>(ra[i]) + static_cast<u128>(pa) * k;
    tau[i + 1] = x > half ? -static_cast<Int128>(modulus - x) : static_cast<Int128>(x);
  }
  return tau;
}

CoefficientTable normalize_hecke(std::vector<Int128> tau, int weight) {
  if (weight != kDeltaWeight) {
    throw ValidationError("normalize_hecke: only weight 12 is supported");
  }
  return CoefficientTable::from_tau(std::move(tau), weight);
}

CoefficientTable build_table(Kind kind, std::uint64_t n_max) {
  return kind == Kind::Divisor ? sieve_divisor(n_max)
                               : normalize_hecke(compute_tau(n_max), kDeltaWeight);
}

// ---------------------------------------------------------------------------
// Local data and Dirichlet series

double local_factor(std::int64_t a, const CoefficientTable& table) {
  if (a == 0) throw ValidationError("local_factor: a must be non-zero");
  if (a < 0 && table.kind() == Kind::CuspForm) return 0.0;
  const auto m = static_cast<std::uint64_t>(a < 0 ? -a : a);
  double product = 1.0;
  for (const auto& [p, alpha] : factorize(m)) {
    const double tp = table.prime_power(p, 1);
    product *= table.prime_power(p, alpha) -
               tp * table.prime_power(p, alpha - 1) / static_cast<double>(p + 1);
  }
  return product;
}

namespace {

void require_coprime(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) throw ValidationError("a and b must be non-zero");
  std::uint64_t x = static_cast<std::uint64_t>(a < 0 ? -a : a);
  std::uint64_t y = static_cast<std::uint64_t>(b < 0 ? -b : b);
  while (y) {
    const auto r = x % y;
    x = y;
    y = r;
  }
  if (x != 1) throw ValidationError("a and b must be coprime");
}

}  // namespace

SeriesValue euler_factor_series(std::int64_t a, std::int64_t b, double s,
                                const CoefficientTable& table, std::uint64_t terms) {
  require_coprime(a, b);
  if (!(s > 1.0)) throw ValidationError("euler_factor_series: s must exceed 1");
  if (table.kind() == Kind::CuspForm && (a < 0) != (b < 0)) return {0.0, 0.0};
  if (terms > table.n_max()) throw CapacityError("euler_factor_series: table too short");

  // F_*(s) over n != 0: both signs contribute for d, only n > 0 for f.
  long double base = 0.0L;
  for (std::uint64_t n = terms; n >= 1; --n) {
    const long double t = table.at(n);
    base += t * t * std::pow(static_cast<long double>(n), -static_cast<long double>(s));
  }
  const double sign_copies = table.kind() == Kind::Divisor ? 2.0 : 1.0;
  base *= sign_copies;

  const auto ab = static_cast<std::uint64_t>(std::llabs(a)) *
                  static_cast<std::uint64_t>(std::llabs(b));
  double correction = 1.0;
  for (const auto& [p, nu] : factorize(ab)) {
    const double tp = table.prime_power(p, 1);
    correction *= table.prime_power(p, nu) -
                  tp * table.prime_power(p, nu - 1) /
                      (std::pow(static_cast<double>(p), s) + 1.0);
  }
  const double logn = std::log(static_cast<double>(terms));
  const double tail = sign_copies * 10.0 * std::pow(static_cast<double>(terms), 1.0 - s) *
                      logn * logn * logn;
  return {static_cast<double>(base) * correction, tail * std::abs(correction)};
}

double truncated_dirichlet(std::int64_t a, std::int64_t b, double s,
                           std::uint64_t terms, const CoefficientTable& table) {
  require_coprime(a, b);
  if (!(s > 1.0)) throw ValidationError("truncated_dirichlet: s must exceed 1");
  if (table.kind() == Kind::CuspForm && (a < 0) != (b < 0)) return 0.0;
  if (terms > table.n_max()) throw CapacityError("truncated_dirichlet: table too short");

  const auto ua = static_cast<std::uint64_t>(std::llabs(a));
  const auto ub = static_cast<std::uint64_t>(std::llabs(b));
  const auto fa = factorize(ua);
  const auto fb = factorize(ub);

  // tau(|a| n) = tau(n') * prod_{q | a} tau(q^{v_q(a) + v_q(n)}), n' coprime to a.
  auto scaled = [&](std::uint64_t n,
                    const std::vector<std::pair<std::uint64_t, int>>& fac) {
    double value = 1.0;
    std::uint64_t rest = n;
    for (const auto& [q, e] : fac) {
      int extra = 0;
      while (rest % q == 0) {
        rest /= q;
        ++extra;
      }
      value *= table.prime_power(q, e + extra);
    }
    return value * table.at(rest);
  };

  long double sum = 0.0L;
  for (std::uint64_t n = terms; n >= 1; --n) {
    const double ta = scaled(n, fa);
    if (ta == 0.0) continue;
    const double tb = scaled(n, fb);
    sum += static_cast<long double>(ta) * tb *
           std::pow(static_cast<long double>(n), -static_cast<long double>(s));
  }
  // Divisor kind: n and -n contribute equally.  Cusp kind with ab > 0: only
  // the sign making an, bn positive survives.
  return static_cast<double>(table.kind() == Kind::Divisor ? 2.0L * sum : sum);
}

RankinEstimate rankin_constant(const CoefficientTable& table, std::uint64_t terms) {
  if (table.kind() != Kind::CuspForm) {
    throw ValidationError("rankin_constant requires a cusp-form table");
  }
  if (terms < 10'000) throw ValidationError("rankin_constant: N must be >= 10^4");
  if (terms > table.n_max()) throw CapacityError("rankin_constant: table too short");

  std::vector<long double> partial(terms + 1, 0.0L);
  for (std::uint64_t n = 1; n <= terms; ++n) {
    const long double r = table.at(n);
    partial[n] = partial[n - 1] + r * r;
  }
  long double sxy = 0.0L;
  long double sxx = 0.0L;
  for (std::uint64_t m = terms / 2; m <= terms; ++m) {
    sxy += partial[m] * static_cast<long double>(m);
    sxx += static_cast<long double>(m) * static_cast<long double>(m);
  }
  const long double slope = sxy / sxx;
  long double ss = 0.0L;
  std::uint64_t count = 0;
  for (std::uint64_t m = terms / 2; m <= terms; ++m) {
    const long double fit = slope * static_cast<long double>(m);
    const long double rel = (partial[m] - fit) / fit;
    ss += rel * rel;
    ++count;
  }
  RankinEstimate est;
  est.c_f = static_cast<double>(slope);
  est.residual = static_cast<double>(std::sqrt(ss / static_cast<long double>(count)));
  est.low_confidence = est.residual > kRankinResidualThreshold;
  est.terms = terms;
  return est;
}

// ---------------------------------------------------------------------------
// Cache

void save_table(const CoefficientTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write cache file " + path.string());
  const auto words = table.payload();
  out.write(kCacheMagic, sizeof kCacheMagic);
  put_le(out, (static_cast<std::uint64_t>(kCacheFormatVersion) << 32) |
                  (table.kind() == Kind::Divisor ? 0U : 1U));
  put_le(out, static_cast<std::uint64_t>(table.weight()));
  put_le(out, table.n_max());
  put_le(out, fnv1a(words));
  for (auto w : words) put_le(out, w);
}

std::optional<CoefficientTable> load_table(const std::filesystem::path& path,
                                           Kind kind, int weight,
                                           std::uint64_t n_max) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCacheMagic, 8) != 0) return std::nullopt;
  std::uint64_t kind_word = 0, w = 0, n = 0, sum = 0;
  if (!get_le(in, kind_word) || !get_le(in, w) || !get_le(in, n) || !get_le(in, sum)) {
    return std::nullopt;
  }
  const std::uint64_t expect_kind =
      (static_cast<std::uint64_t>(kCacheFormatVersion) << 32) |
      (kind == Kind::Divisor ? 0U : 1U);
  const int expect_weight = kind == Kind::Divisor ? 0 : weight;
  if (kind_word != expect_kind || w != static_cast<std::uint64_t>(expect_weight) ||
      n != n_max) {
    return std::nullopt;
  }
  const std::uint64_t count = kind == Kind::Divisor ? n : 2 * n;
  std::vector<std::uint64_t> words(count);
  for (auto& x : words) {
    if (!get_le(in, x)) return std::nullopt;
  }
  if (fnv1a(words) != sum) return std::nullopt;

  if (kind == Kind::Divisor) {
    std::vector<std::uint32_t> d(n + 1, 0);
    for (std::uint64_t i = 0; i < n; ++i) d[i + 1] = static_cast<std::uint32_t>(words[i]);
    return CoefficientTable::from_divisors(std::move(d));
  }
  std::vector<Int128> tau(n + 1, 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto u = (static_cast<unsigned __int128>(words[2 * i + 1]) << 64) | words[2 * i];
    tau[i + 1] = static_cast<Int128>(u);
  }
  return normalize_hecke(std::move(tau), weight);
}

CoefficientTable load_or_build(const std::filesystem::path& cache_dir, Kind kind,
                               std::uint64_t n_max) {
  if (cache_dir.empty()) return build_table(kind, n_max);
  const auto path = cache_dir / (std::string("coeff_") + std::string(to_string(kind)) +
                                 "_" + std::to_string(n_max) + ".bin");
  const int weight = kind == Kind::Divisor ? 0 : kDeltaWeight;
  if (auto cached = load_table(path, kind, weight, n_max)) return std::move(*cached);
  auto table = build_table(kind, n_max);
  std::filesystem::create_directories(cache_dir);
  save_table(table, path);
  return table;
}

}  // namespace divprog
