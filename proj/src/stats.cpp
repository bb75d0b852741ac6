#include "divprog/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "divprog/errors.hpp"

namespace divprog {

std::uint64_t gaussian_moment(int kappa) {
  if (kappa < 0) throw ValidationError("gaussian_moment: order must be >= 0");
  if (kappa % 2 == 1) return 0;
  std::uint64_t m = 1;
  for (int j = kappa - 1; j > 1; j -= 2) m *= static_cast<std::uint64_t>(j);
  return m;
}

double normal_cdf(double x) {
  if (x > 8.0) return 1.0;
  if (x < -8.0) return 0.0;
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ValidationError("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

void Histogram::add(double x) {
  if (x < kLow) {
    ++underflow;
  } else if (x >= kHigh) {
    ++overflow;
  } else {
    const int bin = std::min(kBins - 1, static_cast<int>((x - kLow) / kWidth));
    ++counts[static_cast<std::size_t>(bin)];
  }
}

std::uint64_t Histogram::total() const {
  std::uint64_t t = underflow + overflow;
  for (auto c : counts) t += c;
  return t;
}

DistributionSummary summarize(std::span<const double> samples) {
  if (samples.empty()) throw ValidationError("summarize: no samples");
  DistributionSummary s;
  s.count = samples.size();
  long double sum = 0.0L;
  for (double x : samples) sum += x;
  s.mean = static_cast<double>(sum / s.count);
  std::array<long double, 9> central{};
  for (double x : samples) {
    const long double d = x - s.mean;
    long double pw = 1.0L;
    for (int k = 0; k <= 8; ++k) {
      central[k] += pw;
      pw *= d;
    }
    s.histogram.add(x);
  }
  for (auto& c : central) c /= s.count;
  s.variance = static_cast<double>(central[2]);
  const double sd = std::sqrt(s.variance);
  for (int k = 0; k <= 8; ++k) {
    s.standardized[k] = sd > 0 ? static_cast<double>(central[k] / std::pow(static_cast<long double>(sd), k))
                               : (k == 0 ? 1.0 : 0.0);
  }
  s.ks_normal = ks_statistic(std::vector<double>(samples.begin(), samples.end()), normal_cdf);
  return s;
}

void to_json(nlohmann::json& j, const DistributionSummary& s) {
  j = nlohmann::json{{"count", s.count},
                     {"mean", s.mean},
                     {"variance", s.variance},
                     {"standardized_moments", s.standardized},
                     {"ks_normal", s.ks_normal},
                     {"histogram",
                      {{"low", Histogram::kLow},
                       {"high", Histogram::kHigh},
                       {"width", Histogram::kWidth},
                       {"counts", s.histogram.counts},
                       {"underflow", s.histogram.underflow},
                       {"overflow", s.histogram.overflow}}}};
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_low,bin_high,count\n";
  out << "-inf," << Histogram::kLow << ',' << h.underflow << '\n';
  for (int b = 0; b < Histogram::kBins; ++b) {
    out << Histogram::kLow + b * Histogram::kWidth << ',' << Histogram::kLow + (b + 1) * Histogram::kWidth
        << ',' << h.counts[static_cast<std::size_t>(b)] << '\n';
  }
  out << Histogram::kHigh << ",inf," << h.overflow << '\n';
}

double Covariance2::correlation() const {
  const double denom = std::sqrt(xx * yy);
  return denom > 0 ? xy / denom : 0.0;
}

Covariance2 covariance_estimate(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 2) throw ValidationError("covariance_estimate: need at least two pairs");
  long double mx = 0, my = 0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  const long double n = static_cast<long double>(pairs.size());
  mx /= n;
  my /= n;
  long double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pairs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  Covariance2 c;
  c.count = pairs.size();
  c.xx = static_cast<double>(sxx / (n - 1));
  c.xy = static_cast<double>(sxy / (n - 1));
  c.yy = static_cast<double>(syy / (n - 1));
  return c;
}

}  // namespace divprog
