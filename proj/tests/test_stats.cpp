#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "divprog/stats.hpp"
#include "doctest.h"

using namespace divprog;

TEST_CASE("gaussian moments") {
  CHECK(gaussian_moment(0) == 1);
  CHECK(gaussian_moment(2) == 1);
  CHECK(gaussian_moment(3) == 0);
  CHECK(gaussian_moment(4) == 3);
  CHECK(gaussian_moment(6) == 15);
  for (int k = 0; k <= 30; ++k) {
    REQUIRE(gaussian_moment(k + 2) == static_cast<std::uint64_t>(k + 1) * gaussian_moment(k));
  }
}

TEST_CASE("normal_cdf") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(std::abs(normal_cdf(-1.7) - (1.0 - normal_cdf(1.7))) <= 1e-10);
  auto density = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(density, -1.0, 1.0);
  CHECK(std::abs(normal_cdf(1.0) - normal_cdf(-1.0) - mass) <= 1e-8);
  const boost::math::normal_distribution<double> N;
  for (double x = -8.0; x <= 8.0; x += 0.37) REQUIRE(std::abs(normal_cdf(x) - boost::math::cdf(N, x)) <= 1e-10);
  CHECK(normal_cdf(9.0) == 1.0);
  CHECK(normal_cdf(-9.0) == 0.0);
}

TEST_CASE("ks_statistic") {
  const boost::math::normal_distribution<double> N;
  for (int n : {1, 10, 1000}) {
    std::vector<double> q;
    for (int i = 1; i <= n; ++i) q.push_back(boost::math::quantile(N, (i - 0.5) / n));
    CHECK(ks_statistic(q, normal_cdf) == doctest::Approx(0.5 / n).epsilon(1e-9));
  }
  CHECK(ks_statistic({0.0}, normal_cdf) == doctest::Approx(0.5));
  // Permutation invariance and location-scale consistency.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(3.0, 2.0);
  std::vector<double> x(500);
  for (auto& v : x) v = g(rng);
  std::vector<double> shuffled = x;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(ks_statistic(x, normal_cdf) == ks_statistic(shuffled, normal_cdf));
  std::vector<double> z;
  for (double v : x) z.push_back((v - 3.0) / 2.0);
  const double raw = ks_statistic(x, [](double t) { return normal_cdf((t - 3.0) / 2.0); });
  CHECK(ks_statistic(z, normal_cdf) == doctest::Approx(raw).epsilon(1e-12));
}

TEST_CASE("summarize and histogram") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  std::vector<double> x(20000);
  for (auto& v : x) v = g(rng);
  x.push_back(7.0);
  x.push_back(-6.0);
  const auto s = summarize(x);
  CHECK(s.count == x.size());
  CHECK(s.histogram.total() == x.size());
  CHECK(s.histogram.overflow >= 1);
  CHECK(s.histogram.underflow >= 1);
  CHECK(s.variance >= 0.0);
  CHECK(s.ks_normal >= 0.0);
  CHECK(s.ks_normal <= 1.0);
  CHECK(s.standardized[2] == doctest::Approx(1.0));
  CHECK(std::abs(s.standardized[4] - 3.0) < 0.3);
  nlohmann::json j = s;
  CHECK(j["histogram"]["counts"].size() == 40);
  std::ostringstream csv;
  write_histogram_csv(csv, s.histogram);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 43);
}

TEST_CASE("covariance_estimate") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  std::vector<std::pair<double, double>> same, anti, indep, swapped;
  const int n = 5000;
  for (int i = 0; i < n; ++i) {
    const double a = g(rng), b = g(rng);
    same.emplace_back(a, a);
    anti.emplace_back(a, -a);
    indep.emplace_back(a, b);
    swapped.emplace_back(b, a);
  }
  CHECK(covariance_estimate(same).correlation() == doctest::Approx(1.0));
  CHECK(covariance_estimate(anti).correlation() == doctest::Approx(-1.0));
  const auto c = covariance_estimate(indep);
  CHECK(std::abs(c.correlation()) <= 3.0 / std::sqrt(static_cast<double>(n)));
  const auto t = covariance_estimate(swapped);
  CHECK(t.xx == c.yy);
  CHECK(t.yy == c.xx);
  CHECK(t.xy == doctest::Approx(c.xy).epsilon(1e-14));
}
