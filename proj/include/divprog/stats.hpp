#pragma once
// Gaussian reference moments, Kolmogorov-Smirnov distances, distribution
// summaries with a fixed histogram layout, and 2x2 covariance estimates.

#include <array>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

namespace divprog {

// E[N^kappa] for a standard normal N: 0 for odd kappa, (kappa - 1)!! otherwise.
std::uint64_t gaussian_moment(int kappa);

// Standard normal distribution function, clamped to 0 / 1 beyond |x| > 8.
double normal_cdf(double x);

// sup_x |F_n(x) - cdf(x)| for the empirical distribution of the samples.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

struct Histogram {
  static constexpr double kLow = -5.0;
  static constexpr double kHigh = 5.0;
  static constexpr double kWidth = 0.25;
  static constexpr int kBins = 40;

  std::array<std::uint64_t, kBins> counts{};
  std::uint64_t underflow = 0;  // x < -5
  std::uint64_t overflow = 0;   // x >= 5

  void add(double x);
  std::uint64_t total() const;
};

struct DistributionSummary {
  std::uint64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  // standardized[k] = E[(x - mean)^k] / sd^k for k = 0..8.
  std::array<double, 9> standardized{};
  double ks_normal = 0.0;  // KS distance of the raw samples to N(0, 1)
  Histogram histogram;
};

DistributionSummary summarize(std::span<const double> samples);

void to_json(nlohmann::json& j, const DistributionSummary& s);
void write_histogram_csv(std::ostream& out, const Histogram& h);

struct Covariance2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;
  std::uint64_t count = 0;
  double correlation() const;
};

// Sample covariance (divisor n - 1) of the pairs.
Covariance2 covariance_estimate(std::span<const std::pair<double, double>> pairs);

}  // namespace divprog
