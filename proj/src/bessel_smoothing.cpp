#include "divprog/bessel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

namespace divprog {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;

// Large-argument expansion coefficients a_k(nu) / x^k, with the convention
// a_k = prod_{j<=k} (4 nu^2 - (2j-1)^2) / (k! 8^k).  Summation stops at the
// smallest term.
struct HankelPQ {
  double P = 0.0, Q = 0.0;
};

HankelPQ hankel_pq(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  HankelPQ out;
  double term = 1.0;
  double last = HUGE_VAL;
  for (int k = 0; k < 60; ++k) {
    if (k > 0) term *= (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k * x);
    const double mag = std::abs(term);
    if (k > 1 && mag > last) break;
    last = mag;
    // P takes even k with sign (-1)^{k/2}, Q odd k with sign (-1)^{(k-1)/2}.
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) out.P += sign * term;
    else out.Q += sign * term;
    if (mag < 1e-17) break;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bessel functions

double bessel_j_series(int n, double x) {
  double term = 1.0;
  for (int j = 1; j <= n; ++j) term *= x / (2.0 * j);
  const double q = 0.25 * x * x;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= -q / (static_cast<double>(k) * (k + n));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) && k > x) break;
  }
  return sum;
}

double bessel_j_asymptotic(int n, double x) {
  if (n != 0 && n != 1) throw ValidationError("bessel_j_asymptotic: order must be 0 or 1");
  const auto [P, Q] = hankel_pq(n, x);
  const double chi = x - (0.5 * n + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (P * std::cos(chi) - Q * std::sin(chi));
}

double bessel_j(int n, double x) {
  if (n < 0) throw ValidationError("bessel_j: negative order");
  if (!(x >= 0.0)) throw ValidationError("bessel_j: argument must be >= 0");
  if (x <= kBesselJySwitch || x < n) return bessel_j_series(n, x);
  const double j0 = bessel_j_asymptotic(0, x);
  if (n == 0) return j0;
  double j1 = bessel_j_asymptotic(1, x);
  // Forward recurrence is stable while the order stays below x.
  double prev = j0;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * k / x * j1 - prev;
    prev = j1;
    j1 = next;
  }
  return j1;
}

double bessel_y0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;  // (q^k / k!^2)
  double harmonic = 0.0;
  double tail = 0.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    const double t = ((k % 2 == 1) ? 1.0 : -1.0) * harmonic * term;
    tail += t;
    if (std::abs(t) < 1e-18 && k > x) break;
  }
  return (2.0 / kPi) * ((std::log(0.5 * x) + kEulerGamma) * bessel_j_series(0, x) + tail);
}

double bessel_y0_asymptotic(double x) {
  const auto [P, Q] = hankel_pq(0, x);
  const double chi = x - 0.25 * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (P * std::sin(chi) + Q * std::cos(chi));
}

double bessel_y0(double x) {
  if (!(x > 0.0)) throw ValidationError("bessel_y0: argument must be > 0");
  return x <= kBesselJySwitch ? bessel_y0_series(x) : bessel_y0_asymptotic(x);
}

double bessel_k0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double harmonic = 0.0;
  double i0 = 1.0;
  double tail = 0.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    i0 += term;
    tail += harmonic * term;
    if (term < 1e-18 * i0 && k > x) break;
  }
  return -(std::log(0.5 * x) + kEulerGamma) * i0 + tail;
}

double bessel_k0_asymptotic(double x) {
  double term = 1.0, sum = 1.0, last = HUGE_VAL;
  for (int k = 1; k < 60; ++k) {
    term *= -((2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k * x);
    const double mag = std::abs(term);
    if (mag > last) break;
    last = mag;
    sum += term;
    if (mag < 1e-17) break;
  }
  return std::sqrt(kPi / (2.0 * x)) * std::exp(-x) * sum;
}

double bessel_k0(double x) {
  if (!(x > 0.0)) throw ValidationError("bessel_k0: argument must be > 0");
  return x <= kBesselKSwitch ? bessel_k0_series(x) : bessel_k0_asymptotic(x);
}

// ---------------------------------------------------------------------------
// Weight profile

WeightProfile::WeightProfile(double w0, double w1, double amplitude, std::string name)
    : w0_(w0), w1_(w1), amplitude_(amplitude), name_(std::move(name)) {
  if (!(w0 > 0.0) || !(w1 > w0) || !std::isfinite(w1)) {
    throw ValidationError("weight support must satisfy 0 < w0 < w1");
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw ValidationError("weight amplitude must be positive");
  }
  norm_sq_ = overlap_integral(*this, 1.0, 1.0);
}

double WeightProfile::operator()(double t) const {
  if (t <= w0_ || t >= w1_) return 0.0;
  return amplitude_ * std::exp(-1.0 / ((t - w0_) * (w1_ - t)));
}

WeightProfile WeightProfile::named(const std::string& name) {
  if (name == "bump") return WeightProfile(1.0, 2.0, 1.0, name);
  if (name == "wide") return WeightProfile(1.0, 3.0, 1.0, name);
  if (name == "disjoint") return WeightProfile(1.0, 1.9, 1.0, name);
  if (name == "half") return WeightProfile(0.5, 1.0, 1.0, name);
  throw ValidationError("unknown weight profile '" + name + "'");
}

WeightProfile default_weight(double w0, double w1) { return WeightProfile(w0, w1); }

double overlap_integral(const WeightProfile& w, double m, double n) {
  if (m == 0.0 || n == 0.0) throw ValidationError("overlap_integral: dilations must be non-zero");
  if ((m > 0) != (n > 0)) return 0.0;
  const double a = std::abs(m), b = std::abs(n);
  const double lo = std::max(w.w0() / a, w.w0() / b);
  const double hi = std::min(w.w1() / a, w.w1() / b);
  if (hi <= lo) return 0.0;
  auto f = [&](double t) { return w(a * t) * w(b * t); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 12, 1e-12, &err);
}

// ---------------------------------------------------------------------------
// Transforms

namespace {

using Gauss20 = boost::math::quadrature::gauss<double, 20>;
using Gauss30 = boost::math::quadrature::gauss<double, 30>;

// Scale of |W| used to make tolerances relative: 2 pi sup|w| (w1 - w0).
double transform_scale(const WeightProfile& w) {
  return 2.0 * kPi * w(0.5 * (w.w0() + w.w1())) * (w.w1() - w.w0());
}

}  // namespace

int default_panels(double y, const WeightProfile& w) {
  const double range = 4.0 * kPi * std::sqrt(std::abs(y)) * (std::sqrt(w.w1()) - std::sqrt(w.w0()));
  return std::max(8, static_cast<int>(std::ceil(range / 4.0)));
}

double transform_W_fixed(Kind kind, double y, const WeightProfile& w, int panels) {
  if (y == 0.0) throw ValidationError("transform_W: y must be non-zero");
  if (kind == Kind::CuspForm && y < 0) return 0.0;
  const double root = 4.0 * kPi * std::sqrt(std::abs(y));
  double prefactor = 0.0;
  double (*kernel)(double) = nullptr;
  if (kind == Kind::CuspForm) {
    // 2 pi i^k with k = 12.
    prefactor = 2.0 * kPi * ((kDeltaWeight / 2) % 2 == 0 ? 1.0 : -1.0);
    kernel = [](double v) { return bessel_j(kDeltaWeight - 1, v); };
  } else if (y > 0) {
    prefactor = -2.0 * kPi;
    kernel = bessel_y0;
  } else {
    prefactor = 4.0;
    kernel = bessel_k0;
  }
  // u = r^2 makes the kernel argument linear in r.
  const double a = std::sqrt(w.w0()), b = std::sqrt(w.w1());
  const double h = (b - a) / panels;
  auto integrand = [&](double r) {
    const double u = r * r;
    const double wu = w(u);
    return wu == 0.0 ? 0.0 : 2.0 * r * wu * kernel(root * r);
  };
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    total += Gauss20::integrate(integrand, a + i * h, a + (i + 1) * h);
  }
  return prefactor * total;
}

TransformValue transform_W_detail(Kind kind, double y, const WeightProfile& w, double tol) {
  int panels = default_panels(y, w);
  const double scale = transform_scale(w);
  double prev = transform_W_fixed(kind, y, w, panels);
  double change = HUGE_VAL;
  for (int step = 0; step < 6; ++step) {
    panels *= 2;
    const double next = transform_W_fixed(kind, y, w, panels);
    change = std::abs(next - prev);
    prev = next;
    if (change <= tol * std::max(scale, 1e-300)) return {prev, change, panels};
  }
  if (change > 1e-9 * std::min(1.0, scale)) {
    throw QuadratureError("transform_W did not converge at y=" + std::to_string(y), change);
  }
  return {prev, change, panels};
}

double transform_W(Kind kind, double y, const WeightProfile& w) {
  return transform_W_detail(kind, y, w).value;
}

// ---------------------------------------------------------------------------
// Interpolant

namespace {

constexpr int kGeometricPanels = 24;
constexpr double kRelativeCutoff = 1e-12;
constexpr double kRadiusCap = 2000.0;

template <std::size_t N>
std::array<double, N> chebyshev_fit(const std::array<double, N>& f) {
  std::array<double, N> c{};
  for (std::size_t k = 0; k < N; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      s += f[j] * std::cos(kPi * static_cast<double>(k) * (j + 0.5) / N);
    }
    c[k] = 2.0 * s / N;
  }
  c[0] *= 0.5;
  return c;
}

template <std::size_t N>
double clenshaw(const std::array<double, N>& c, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = N - 1; k >= 1; --k) {
    const double b0 = 2.0 * x * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c[0];
}

}  // namespace

TransformInterpolant::TransformInterpolant(Kind kind, const WeightProfile& w)
    : kind_(kind), profile_(w) {
  // W(r^2) is band-limited in r with top frequency 4 pi sqrt(w1); four radians
  // per panel keeps 16 Chebyshev nodes well inside the resolution limit.
  width_ = std::min(0.25, 4.0 / (4.0 * kPi * std::sqrt(w.w1())));
  rmin_ = width_ * std::ldexp(1.0, -kGeometricPanels);
  pos_ = build_side(+1, rmax_pos_);
  if (kind_ == Kind::Divisor) neg_ = build_side(-1, rmax_neg_);

  certificate_.A = 5.0;
  certificate_.y_max = std::max(rmax_pos_, rmax_neg_);
  certificate_.y_max *= certificate_.y_max;
  double c = 0.0;
  for (int sign : {+1, -1}) {
    const auto& side = sign > 0 ? pos_ : neg_;
    for (const auto& p : side) {
      if (p.hi < 1.0) continue;
      for (int j = 0; j <= 4 * kNodes; ++j) {
        const double r = std::max(1.0, p.lo + (p.hi - p.lo) * j / (4.0 * kNodes));
        const double y = r * r;
        c = std::max(c, std::abs(eval_side(side, r, sign)) * std::pow(y, certificate_.A));
      }
    }
  }
  certificate_.C = c;
}

std::vector<TransformInterpolant::Panel> TransformInterpolant::build_side(int sign, double& rmax) {
  std::vector<Panel> side;
  auto fill = [&](double lo, double hi) {
    Panel p;
    p.lo = lo;
    p.hi = hi;
    std::array<double, kNodes> f{};
    double peak = 0.0;
    for (int j = 0; j < kNodes; ++j) {
      const double x = std::cos(kPi * (j + 0.5) / kNodes);
      const double r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
      const double y = sign * r * r;
      f[j] = transform_W_fixed(kind_, y, profile_, 2 * default_panels(y, profile_));
      peak = std::max(peak, std::abs(f[j]));
    }
    p.c = chebyshev_fit(f);
    side.push_back(p);
    return peak;
  };
  double peak = 0.0, r_peak = 0.0;
  for (int k = kGeometricPanels; k >= 1; --k) {
    const double lo = width_ * std::ldexp(1.0, -k);
    const double m = fill(lo, 2.0 * lo);
    if (m > peak) { peak = m; r_peak = 2.0 * lo; }
  }
  double lo = width_;
  int quiet = 0;
  while (lo < kRadiusCap) {
    const double hi = lo + width_;
    const double m = fill(lo, hi);
    if (m > peak) { peak = m; r_peak = hi; }
    quiet = (m < kRelativeCutoff * peak) ? quiet + 1 : 0;
    lo = hi;
    if (quiet >= 4 && lo > 2.0 * r_peak + 1.0) break;
  }
  rmax = lo;
  return side;
}

double TransformInterpolant::eval_side(const std::vector<Panel>& side, double r, int sign) const {
  if (side.empty()) return 0.0;
  if (r < rmin_) return transform_W_fixed(kind_, sign * r * r, profile_, 8);
  auto it = std::upper_bound(side.begin(), side.end(), r,
                             [](double v, const Panel& p) { return v < p.hi; });
  if (it == side.end()) return 0.0;
  const double x = (2.0 * r - it->lo - it->hi) / (it->hi - it->lo);
  return clenshaw(it->c, x);
}

double TransformInterpolant::operator()(double y) const {
  if (y == 0.0) throw ValidationError("W(y): y must be non-zero");
  if (y > 0) return eval_side(pos_, std::sqrt(y), +1);
  if (kind_ == Kind::CuspForm) return 0.0;
  return eval_side(neg_, std::sqrt(-y), -1);
}

std::vector<double> TransformInterpolant::edges(int sign) const {
  const auto& side = sign > 0 ? pos_ : neg_;
  std::vector<double> out;
  if (side.empty()) return out;
  out.push_back(0.0);
  for (const auto& p : side) out.push_back(p.hi);
  return out;
}

// ---------------------------------------------------------------------------
// Unitarity identities

IdentityCheck plancherel_check(const TransformInterpolant& W) {
  // int W(y)^2 dy = sum over signs of int_0^inf 2 r W(+-r^2)^2 dr.
  double lhs = 0.0;
  for (int sign : {+1, -1}) {
    const auto e = W.edges(sign);
    for (std::size_t i = 0; i + 1 < e.size(); ++i) {
      auto f = [&](double r) {
        if (r == 0.0) return 0.0;
        const double v = W(sign * r * r);
        return 2.0 * r * v * v;
      };
      lhs += Gauss30::integrate(f, e[i], e[i + 1]);
    }
  }
  const double rhs = W.profile().norm_sq();
  return {lhs, rhs, std::abs(lhs - rhs)};
}

IdentityCheck plancherel_check(Kind kind, const WeightProfile& w) {
  return plancherel_check(TransformInterpolant(kind, w));
}

IdentityCheck cross_product_check(const TransformInterpolant& W, double m, double n) {
  if (m == 0.0 || n == 0.0) throw ValidationError("cross_product_check: m and n must be non-zero");
  const double big = std::max(std::abs(m), std::abs(n));
  const double step = W.panel_width() / std::sqrt(big);
  double lhs = 0.0;
  // t = sigma s^2 on each half-line.
  for (int sigma : {+1, -1}) {
    const double ym = sigma * m, yn = sigma * n;
    const double cut_m = std::sqrt(W.y_cut(ym > 0 ? +1 : -1) / std::abs(m));
    const double cut_n = std::sqrt(W.y_cut(yn > 0 ? +1 : -1) / std::abs(n));
    const double s_max = std::min(cut_m, cut_n);
    if (W.kind() == Kind::CuspForm && (ym < 0 || yn < 0)) continue;
    auto f = [&](double s) {
      if (s == 0.0) return 0.0;
      const double t = s * s;
      return 2.0 * s * W(ym * t) * W(yn * t);
    };
    std::vector<double> e{0.0};
    for (int k = kGeometricPanels; k >= 1; --k) e.push_back(step * std::ldexp(1.0, -k));
    for (double s = step; s < s_max; s += step) e.push_back(std::min(s + step, s_max));
    if (e.back() > s_max) e.back() = s_max;
    for (std::size_t i = 0; i + 1 < e.size(); ++i) {
      if (e[i + 1] <= e[i]) continue;
      lhs += Gauss30::integrate(f, e[i], e[i + 1]);
    }
  }
  const double rhs = overlap_integral(W.profile(), m, n);
  return {lhs, rhs, std::abs(lhs - rhs)};
}

IdentityCheck cross_product_check(Kind kind, double m, double n, const WeightProfile& w) {
  return cross_product_check(TransformInterpolant(kind, w), m, n);
}

// ---------------------------------------------------------------------------
// Tables and self-test

TransformTable::TransformTable(const TransformInterpolant& W, double Y, std::int64_t n_max)
    : kind_(W.kind()), Y_(Y), n_max_(n_max), certificate_(W.certificate()) {
  if (!(Y > 0.0)) throw ValidationError("transform table: Y must be positive");
  if (n_max < 1) throw ValidationError("transform table: n_max must be >= 1");
  values_.assign(static_cast<std::size_t>(2 * n_max + 1), 0.0);
  for (std::int64_t n = -n_max; n <= n_max; ++n) {
    if (n == 0) continue;
    values_[static_cast<std::size_t>(n + n_max)] = W(static_cast<double>(n) / Y);
  }
}

TransformTable build_transform_table(const TransformInterpolant& W, double Y, std::int64_t n_max) {
  return TransformTable(W, Y, n_max);
}

std::vector<SelfTestRow> bessel_selftest(const TransformInterpolant& W, int points_per_decade) {
  // Near zero W_d(y) = alpha - 2 (int w) log|y| + o(1), so the ratio
  // |W| / (1 + |log|y||) is eventually monotone with limit 2 int w.  The
  // constant is that limit or the largest ratio seen on [1e-6, 1].
  double c_small = 0.0;
  if (W.kind() == Kind::Divisor) {
    const auto& w = W.profile();
    double err = 0.0;
    c_small = 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                        [&](double t) { return w(t); }, w.w0(), w.w1(), 12, 1e-12, &err);
  }
  for (int sign : {+1, -1}) {
    for (int k = -6 * points_per_decade; k <= 0; ++k) {
      const double y = sign * std::pow(10.0, static_cast<double>(k) / points_per_decade);
      c_small = std::max(c_small, std::abs(W(y)) / (1.0 + std::abs(std::log(std::abs(y)))));
    }
  }
  const auto& cert = W.certificate();
  std::vector<SelfTestRow> rows;
  for (int sign : {-1, +1}) {
    for (int k = -12 * points_per_decade; k <= 3 * points_per_decade; ++k) {
      const double y = sign * std::pow(10.0, static_cast<double>(k) / points_per_decade);
      const double v = W(y);
      const double ay = std::abs(y);
      const double bound = ay < 1.0 ? c_small * (1.0 + std::abs(std::log(ay))) * (1.0 + 1e-12)
                                    : cert.C * std::pow(ay, -cert.A) * (1.0 + 1e-12);
      rows.push_back({W.kind(), y, v, std::abs(v) <= bound});
    }
  }
  return rows;
}

}  // namespace divprog
