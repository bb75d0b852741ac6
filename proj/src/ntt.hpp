#pragma once
// Number-theoretic transform over ~62-bit primes with Montgomery arithmetic.

#include <cstdint>
#include <vector>

namespace divprog::detail {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

class Montgomery {
 public:
  explicit Montgomery(u64 mod) : mod_(mod) {
    u64 inv = mod;
    for (int i = 0; i < 6; ++i) inv *= 2 - mod * inv;
    neg_inv_ = ~inv + 1;
    const u64 r1 = static_cast<u64>((static_cast<u128>(1) << 64) % mod);
    r2_ = static_cast<u64>(static_cast<u128>(r1) * r1 % mod);
  }

  u64 mod() const { return mod_; }

  u64 reduce(u128 t) const {
    const u64 m = static_cast<u64>(t) * neg_inv_;
    const u64 r = static_cast<u64>((t + static_cast<u128>(m) * mod_) >> 64);
    return r >= mod_ ? r - mod_ : r;
  }
  u64 to(u64 x) const { return reduce(static_cast<u128>(x % mod_) * r2_); }
  u64 from(u64 x) const { return reduce(x); }
  u64 mul(u64 a, u64 b) const { return reduce(static_cast<u128>(a) * b); }
  u64 add(u64 a, u64 b) const {
    const u64 s = a + b;
    return s >= mod_ ? s - mod_ : s;
  }
  u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + mod_ - b; }
  u64 pow(u64 base, u64 e) const {  // Montgomery form in and out
    u64 result = to(1);
    while (e) {
      if (e & 1) result = mul(result, base);
      base = mul(base, base);
      e >>= 1;
    }
    return result;
  }

 private:
  u64 mod_;
  u64 neg_inv_;
  u64 r2_;
};

struct NttPrime {
  u64 modulus;
  u64 generator;
};

// 29 * 2^57 + 1 and 69 * 2^55 + 1.
inline constexpr NttPrime kNttPrimeA{4179340454199820289ULL, 3};
inline constexpr NttPrime kNttPrimeB{2485986994308513793ULL, 5};

class Ntt {
 public:
  explicit Ntt(NttPrime prime) : mg_(prime.modulus), generator_(mg_.to(prime.generator)) {}

  const Montgomery& field() const { return mg_; }

  // In-place transform of Montgomery-form values; size must be a power of two.
  void transform(std::vector<u64>& a, bool inverse) const {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    const u64 mod = mg_.mod();
    std::vector<u64> roots;
    for (std::size_t len = 2; len <= n; len <<= 1) {
      u64 step = mg_.pow(generator_, (mod - 1) / len);
      if (inverse) step = mg_.pow(step, mod - 2);
      const std::size_t half = len / 2;
      roots.assign(half, 0);
      roots[0] = mg_.to(1);
      for (std::size_t k = 1; k < half; ++k) roots[k] = mg_.mul(roots[k - 1], step);
      for (std::size_t i = 0; i < n; i += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const u64 u = a[i + k];
          const u64 v = mg_.mul(a[i + k + half], roots[k]);
          a[i + k] = mg_.add(u, v);
          a[i + k + half] = mg_.sub(u, v);
        }
      }
    }
    if (inverse) {
      const u64 n_inv = mg_.pow(mg_.to(n), mod - 2);
      for (auto& x : a) x = mg_.mul(x, n_inv);
    }
  }

  // Truncated square: returns the first `terms` coefficients of poly^2.
  std::vector<u64> square(const std::vector<u64>& poly, std::size_t terms) const {
    std::size_t size = 1;
    while (size < 2 * terms) size <<= 1;
    std::vector<u64> a(size, 0);
    for (std::size_t i = 0; i < terms && i < poly.size(); ++i) a[i] = poly[i];
    transform(a, false);
    for (auto& x : a) x = mg_.mul(x, x);
    transform(a, true);
    a.resize(terms);
    return a;
  }

 private:
  Montgomery mg_;
  u64 generator_;
};

}  // namespace divprog::detail
