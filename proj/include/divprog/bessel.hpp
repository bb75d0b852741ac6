#pragma once
// Smooth weights, the Bessel functions J_n, Y_0, K_0 and the Voronoi
// transforms W_d, W_f together with a piecewise Chebyshev interpolant used
// for the dual sums and the unitarity identities.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "divprog/arith.hpp"
#include "divprog/errors.hpp"

namespace divprog {

// --- Bessel functions ------------------------------------------------------

double bessel_j(int n, double x);  // x >= 0
double bessel_y0(double x);        // x > 0
double bessel_k0(double x);        // x > 0

// Switch points between the power series and the large-argument expansions.
inline constexpr double kBesselJySwitch = 12.0;
inline constexpr double kBesselKSwitch = 9.0;

// Branch evaluators, exposed so the overlap agreement can be tested.
double bessel_j_series(int n, double x);
double bessel_j_asymptotic(int n, double x);  // n in {0, 1}
double bessel_y0_series(double x);
double bessel_y0_asymptotic(double x);
double bessel_k0_series(double x);
double bessel_k0_asymptotic(double x);

// --- weight profile --------------------------------------------------------

// w(t) = amp * exp(-1 / ((t - w0)(w1 - t))) on (w0, w1), zero elsewhere.
class WeightProfile {
 public:
  WeightProfile(double w0, double w1, double amplitude = 1.0, std::string name = "bump");

  double operator()(double t) const;
  double w0() const noexcept { return w0_; }
  double w1() const noexcept { return w1_; }
  double amplitude() const noexcept { return amplitude_; }
  const std::string& name() const noexcept { return name_; }
  double norm_sq() const noexcept { return norm_sq_; }

  // "bump" (1, 2), "wide" (1, 3), "disjoint" (1, 1.9), "half" (0.5, 1).
  static WeightProfile named(const std::string& name);

 private:
  double w0_, w1_, amplitude_;
  std::string name_;
  double norm_sq_ = 0.0;
};

WeightProfile default_weight(double w0, double w1);

// int_R w(m t) w(n t) dt for non-zero real m, n.
double overlap_integral(const WeightProfile& w, double m, double n);

// --- Voronoi transforms ----------------------------------------------------

struct TransformValue {
  double value = 0.0;
  double error = 0.0;  // change under the last step halving
  int panels = 0;
};

// Panel count for the composite Gauss-Legendre rule in r = sqrt(u),
// proportional to the number of oscillations of the kernel.
int default_panels(double y, const WeightProfile& w);

// W_*(y) with a fixed number of panels (no refinement).
double transform_W_fixed(Kind kind, double y, const WeightProfile& w, int panels);

// W_*(y), halving the step until two successive values agree to tol.
// Throws QuadratureError if 1e-9 is not reached.
TransformValue transform_W_detail(Kind kind, double y, const WeightProfile& w, double tol = 1e-13);
double transform_W(Kind kind, double y, const WeightProfile& w);

// |W(y)| <= C |y|^-A for 1 <= |y| <= y_max; beyond y_max the sampled values
// have fallen below the interpolant threshold.
struct DecayCertificate {
  double A = 5.0;
  double C = 0.0;
  double y_max = 0.0;
};

// Piecewise Chebyshev interpolant of W_* in r = sqrt|y| on both half-lines.
class TransformInterpolant {
 public:
  static constexpr int kNodes = 16;

  TransformInterpolant(Kind kind, const WeightProfile& w);

  double operator()(double y) const;
  Kind kind() const noexcept { return kind_; }
  const WeightProfile& profile() const noexcept { return profile_; }
  const DecayCertificate& certificate() const noexcept { return certificate_; }
  // W is treated as zero for |y| > y_cut(sign).
  double y_cut(int sign) const { return sign > 0 ? rmax_pos_ * rmax_pos_ : rmax_neg_ * rmax_neg_; }
  double panel_width() const noexcept { return width_; }
  // Panel edges in r on one side (used by integrators).
  std::vector<double> edges(int sign) const;

 private:
  struct Panel {
    double lo = 0.0, hi = 0.0;
    std::array<double, kNodes> c{};
  };
  std::vector<Panel> build_side(int sign, double& rmax);
  double eval_side(const std::vector<Panel>& side, double r, int sign) const;

  Kind kind_;
  WeightProfile profile_;
  double width_ = 0.25;
  double rmin_ = 0.0;
  std::vector<Panel> pos_, neg_;
  double rmax_pos_ = 0.0, rmax_neg_ = 0.0;
  DecayCertificate certificate_;
};

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double diff = 0.0;
};

// int_{R^x} W(y)^2 dy against ||w||^2.
IdentityCheck plancherel_check(const TransformInterpolant& W);
IdentityCheck plancherel_check(Kind kind, const WeightProfile& w);
// int W(m t) W(n t) dt against int w(m t) w(n t) dt.
IdentityCheck cross_product_check(const TransformInterpolant& W, double m, double n);
IdentityCheck cross_product_check(Kind kind, double m, double n, const WeightProfile& w);

// W(n / Y) cached for 0 < |n| <= n_max.
class TransformTable {
 public:
  TransformTable(const TransformInterpolant& W, double Y, std::int64_t n_max);

  double operator()(std::int64_t n) const { return values_[static_cast<std::size_t>(n + n_max_)]; }
  Kind kind() const noexcept { return kind_; }
  double scale() const noexcept { return Y_; }
  std::int64_t n_max() const noexcept { return n_max_; }
  const DecayCertificate& certificate() const noexcept { return certificate_; }

 private:
  Kind kind_;
  double Y_;
  std::int64_t n_max_;
  std::vector<double> values_;
  DecayCertificate certificate_;
};

TransformTable build_transform_table(const TransformInterpolant& W, double Y, std::int64_t n_max);

struct SelfTestRow {
  Kind kind;
  double y = 0.0;
  double W = 0.0;
  bool bound_check = false;
};

// W on a symmetric log grid with the decay bound evaluated at each point:
// |W| <= C0 (1 + |log|y||) for |y| < 1 and the certificate for |y| >= 1.
std::vector<SelfTestRow> bessel_selftest(const TransformInterpolant& W, int points_per_decade = 4);

}  // namespace divprog
