#include "divprog/kloosterman.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "divprog/fft.hpp"

namespace divprog {

// ---------------------------------------------------------------------------
// Modular arithmetic

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
    if (n % q == 0) return n == q;
  }
  for (std::uint64_t q = 17; q * q <= n; q += 2) {
    if (n % q == 0) return false;
  }
  return true;
}

std::uint64_t mod_reduce(std::int64_t a, std::uint64_t m) {
  const auto sm = static_cast<std::int64_t>(m);
  std::int64_t r = a % sm;
  if (r < 0) r += sm;
  return static_cast<std::uint64_t>(r);
}

std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t m) {
  std::int64_t old_r = static_cast<std::int64_t>(a % m), r = static_cast<std::int64_t>(m);
  std::int64_t old_s = 1, s = 0;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
    std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
  }
  if (old_r != 1) throw ValidationError("mod_inverse: argument not invertible");
  return mod_reduce(old_s, m);
}

std::vector<std::uint32_t> inverse_table(std::uint32_t p) {
  std::vector<std::uint32_t> inv(p, 0);
  if (p < 2) return inv;
  inv[1] = 1;
  for (std::uint32_t x = 2; x < p; ++x) {
    const std::uint64_t q = p / x;
    inv[x] = static_cast<std::uint32_t>((p - (q * inv[p % x]) % p) % p);
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Kloosterman sums

double kloosterman_sum(std::int64_t a, std::int64_t b, std::uint64_t c) {
  if (c == 0) throw ValidationError("kloosterman_sum: modulus must be >= 1");
  if (c == 1) return 1.0;
  const std::uint64_t ar = mod_reduce(a, c);
  const std::uint64_t br = mod_reduce(b, c);
  double sum = 0.0;
  // x and c - x give conjugate terms, so only the cosines survive.
  for (std::uint64_t x = 1; 2 * x <= c; ++x) {
    if (std::gcd(x, c) != 1) continue;
    const std::uint64_t xbar = mod_inverse(x, c);
    const auto phase = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(ar) * x + static_cast<unsigned __int128>(br) * xbar) % c);
    const double weight = (2 * x == c) ? 1.0 : 2.0;
    sum += weight * std::cos(2.0 * std::numbers::pi * static_cast<double>(phase) /
                             static_cast<double>(c));
  }
  return sum;
}

double kl_normalized(std::int64_t a, std::int64_t b, std::uint64_t c) {
  return kloosterman_sum(a, b, c) / std::sqrt(static_cast<double>(c));
}

std::vector<double> kloosterman_row(std::int64_t b, std::uint64_t c) {
  if (c == 0) throw ValidationError("kloosterman_row: modulus must be >= 1");
  const std::uint64_t br = mod_reduce(b, c);
  std::vector<Complex> signal(c, 0.0);
  for (std::uint64_t x = 0; x < c; ++x) {
    if (std::gcd(x, c) != 1) continue;
    const std::uint64_t phase = br * mod_inverse(x, c) % c;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(c);
    signal[x] = {std::cos(angle), std::sin(angle)};
  }
  const auto spectrum = chirp_dft(signal, +1);
  std::vector<double> row(c);
  for (std::uint64_t a = 0; a < c; ++a) row[a] = spectrum[a].real();
  return row;
}

KlTable::KlTable(std::uint32_t p) : p_(p) {
  if (p < 3 || !is_prime(p)) {
    throw ValidationError("kl_table: modulus " + std::to_string(p) + " is not an odd prime");
  }
  inverses_ = inverse_table(p);
  std::vector<Complex> signal(p, 0.0);
  for (std::uint32_t x = 1; x < p; ++x) {
    const double angle = 2.0 * std::numbers::pi * inverses_[x] / static_cast<double>(p);
    signal[x] = {std::cos(angle), std::sin(angle)};
  }
  const auto spectrum = chirp_dft(signal, +1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  values_.resize(p);
  for (std::uint32_t a = 0; a < p; ++a) values_[a] = spectrum[a].real() * scale;
}

double KlTable::twisted(std::int64_t a, std::int64_t n) const {
  const std::uint64_t nr = mod_reduce(n, p_);
  if (nr == 0) return -1.0 / std::sqrt(static_cast<double>(p_));
  const std::uint64_t ar = mod_reduce(a, p_);
  return values_[(ar * nr) % p_];
}

KlTable kl_table(std::uint32_t p) { return KlTable(p); }

double kl_scaled_discrepancy(std::uint32_t p,
                             std::span<const std::pair<std::int64_t, std::int64_t>> pairs) {
  double worst = 0.0;
  for (const auto& [a, b] : pairs) {
    if (mod_reduce(b, p) == 0) throw ValidationError("kl_scaled_discrepancy: p divides b");
    const double lhs = kl_normalized(a, b, p);
    const double rhs = kl_normalized(static_cast<std::int64_t>(
                                         (mod_reduce(a, p) * mod_reduce(b, p)) % p),
                                     1, p);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Projective maps

ProjectiveMap parse_map(const std::string& text) {
  std::vector<std::int64_t> entries;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      entries.push_back(std::stoll(item, &used));
      if (used != item.size()) throw ValidationError("");
    } catch (const std::exception&) {
      throw ValidationError("bad matrix entry '" + item + "'");
    }
  }
  if (entries.size() != 4) throw ValidationError("matrix needs four entries a,b,c,d");
  ProjectiveMap m{entries[0], entries[1], entries[2], entries[3]};
  if (m.det() == 0) throw ValidationError("matrix " + text + " is singular");
  return m;
}

std::string format_map(const ProjectiveMap& m) {
  return std::to_string(m.a) + "," + std::to_string(m.b) + "," + std::to_string(m.c) + "," +
         std::to_string(m.d);
}

Pgl2Element normalize(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d,
                      std::uint64_t p) {
  const std::uint64_t pivot = c != 0 ? c : d;
  const std::uint64_t s = mod_inverse(pivot, p);
  auto scale = [&](std::uint64_t x) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(x) * s % p);
  };
  return {scale(a), scale(b), scale(c), scale(d)};
}

Pgl2Element reduce(const ProjectiveMap& m, std::uint64_t p) {
  if (mod_reduce(m.det(), p) == 0) {
    throw ReductionError("map [" + format_map(m) + "] does not reduce mod " + std::to_string(p) +
                         " (p divides det)");
  }
  return normalize(mod_reduce(m.a, p), mod_reduce(m.b, p), mod_reduce(m.c, p),
                   mod_reduce(m.d, p), p);
}

P1Point apply_map(const Pgl2Element& g, P1Point z, std::uint64_t p) {
  auto mul = [p](std::uint64_t x, std::uint64_t y) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(x) * y % p);
  };
  if (z.infinity) {
    if (g.c == 0) return P1Point::at_infinity();
    return P1Point::finite(mul(g.a, mod_inverse(g.c, p)));
  }
  const std::uint64_t num = (mul(g.a, z.value) + g.b) % p;
  const std::uint64_t den = (mul(g.c, z.value) + g.d) % p;
  if (den == 0) return P1Point::at_infinity();
  return P1Point::finite(mul(num, mod_inverse(den, p)));
}

P1Point apply_map(const ProjectiveMap& m, P1Point z, std::uint64_t p) {
  return apply_map(reduce(m, p), z, p);
}

CanonicalDiagonal canonical_diagonal(const ProjectiveMap& m) {
  if (!m.is_diagonal()) throw ValidationError("canonical_diagonal: map is not diagonal");
  if (m.det() == 0) throw ValidationError("canonical_diagonal: singular map");
  const std::int64_t g = std::gcd(m.a, m.d);
  const std::int64_t alpha = m.a > 0 ? g : -g;
  return {alpha, m.a / alpha, m.d / alpha};
}

// ---------------------------------------------------------------------------
// Configurations

int Configuration::kappa() const {
  return std::accumulate(multiplicities.begin(), multiplicities.end(), 0);
}

bool Configuration::mirror() const {
  return !multiplicities.empty() &&
         std::all_of(multiplicities.begin(), multiplicities.end(),
                     [](int m) { return m % 2 == 0; });
}

Configuration configuration_of(std::span<const Pgl2Element> maps) {
  std::map<Pgl2Element, int> counts;
  for (const auto& g : maps) ++counts[g];
  Configuration cfg;
  for (const auto& [g, n] : counts) cfg.multiplicities.push_back(n);
  std::sort(cfg.multiplicities.rbegin(), cfg.multiplicities.rend());
  return cfg;
}

std::string format_configuration(const Configuration& cfg) {
  std::string out = "(";
  for (std::size_t i = 0; i < cfg.multiplicities.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(cfg.multiplicities[i]);
  }
  return out + ")";
}

std::uint64_t st_mult(int mu) {
  if (mu < 0) throw ValidationError("st_mult: negative exponent");
  if (mu % 2) return 0;
  const int m = mu / 2;
  // Catalan(m) = binom(2m, m) / (m + 1), built incrementally to stay exact.
  std::uint64_t c = 1;
  for (int i = 0; i < m; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
  return c;
}

double st_mult_quadrature(int mu) {
  using boost::math::quadrature::gauss_kronrod;
  auto integrand = [mu](double t) {
    const double s = std::sin(t);
    return std::pow(2.0 * std::cos(t), mu) * s * s;
  };
  const double integral =
      gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::numbers::pi, 15, 1e-15);
  return 2.0 / std::numbers::pi * integral;
}

std::uint64_t a_constant(const Configuration& cfg) {
  std::uint64_t product = 1;
  for (int mu : cfg.multiplicities) product *= st_mult(mu);
  return product;
}

ConfigurationSum configuration_sum(std::span<const ProjectiveMap> maps, const KlTable& table) {
  std::vector<Pgl2Element> reduced;
  reduced.reserve(maps.size());
  for (const auto& m : maps) reduced.push_back(reduce(m, table.prime()));
  return configuration_sum(std::span<const Pgl2Element>(reduced), table);
}

ConfigurationSum configuration_sum(std::span<const Pgl2Element> maps, const KlTable& table) {
  if (maps.empty()) throw ValidationError("configuration_sum: empty map list");
  if (maps.size() > 12) throw ValidationError("configuration_sum: kappa must be <= 12");
  const std::uint32_t p = table.prime();
  std::vector<Pgl2Element> sorted(maps.begin(), maps.end());
  std::sort(sorted.begin(), sorted.end());
  const auto& inv = table.inverses();

  long double total = 0.0L;
  std::uint64_t excluded = 0;
  for (std::uint64_t a = 0; a < p; ++a) {
    long double product = 1.0L;
    bool skip = false;
    for (const auto& g : sorted) {
      const std::uint64_t num = (g.a * a + g.b) % p;
      const std::uint64_t den = (g.c * a + g.d) % p;
      if (num == 0 || den == 0) {
        skip = true;
        break;
      }
      product *= table[static_cast<std::uint32_t>(num * inv[den] % p)];
    }
    if (skip) {
      ++excluded;
      continue;
    }
    total += product;
  }

  ConfigurationSum out;
  out.p = p;
  out.kappa = static_cast<int>(maps.size());
  out.config = configuration_of(sorted);
  out.a_value = a_constant(out.config);
  out.value = static_cast<double>(total);
  out.ratio = (out.value - static_cast<double>(out.a_value) * p) / std::sqrt(static_cast<double>(p));
  out.excluded = excluded;
  return out;
}

void to_json(nlohmann::json& j, const ConfigurationSum& s) {
  j = nlohmann::json{{"p", s.p},
                     {"kappa", s.kappa},
                     {"config", s.config.multiplicities},
                     {"A", s.a_value},
                     {"S", s.value},
                     {"ratio", s.ratio},
                     {"excluded_count", s.excluded}};
}

std::vector<double> sato_tate_angles(const KlTable& table) {
  std::vector<double> angles;
  angles.reserve(table.prime() - 1);
  for (std::uint32_t a = 1; a < table.prime(); ++a) {
    const double kl = table[a];
    if (std::abs(kl) > 2.0 + 1e-9) {
      throw NumericIntegrityError("Weil bound violated: Kl(" + std::to_string(a) + ";" +
                                  std::to_string(table.prime()) + ") = " + std::to_string(kl));
    }
    angles.push_back(std::acos(std::clamp(kl / 2.0, -1.0, 1.0)));
  }
  return angles;
}

double sato_tate_cdf(double theta) {
  if (theta <= 0.0) return 0.0;
  if (theta >= std::numbers::pi) return 1.0;
  return (theta - std::sin(theta) * std::cos(theta)) / std::numbers::pi;
}

}  // namespace divprog
