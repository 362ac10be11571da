#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ebl/errors.hpp"
#include "ebl/gaussian.hpp"
#include "oracles/oracles.hpp"

using namespace ebl;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("extended reals follow the inf - inf = -inf convention") {
  const auto p = ExtendedReal::plus_infinity();
  const auto m = ExtendedReal::minus_infinity();
  CHECK((p + m).is_minus_infinity());
  CHECK((m + p).is_minus_infinity());
  CHECK((p - p).is_minus_infinity());
  CHECK(scale(2.0, p).is_plus_infinity());
  CHECK(scale(0.5, m).is_minus_infinity());
  CHECK(m < ExtendedReal(-1e308));
  CHECK(ExtendedReal(1e308) < p);
  CHECK(inequality_gap(m, m) == ExtendedReal(0.0));
  CHECK(inequality_gap(p, p) == ExtendedReal(0.0));
  CHECK(inequality_gap(m, ExtendedReal(0.0)).is_minus_infinity());
}

TEST_CASE("std_normal_cdf matches the high-precision oracle") {
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK(std_normal_cdf(ExtendedReal::minus_infinity()) == 0.0);
  CHECK(std_normal_cdf(ExtendedReal::plus_infinity()) == 1.0);
  CHECK(std::fabs(std_normal_cdf(1.4) - oracle::kPhi_1_4) <= 1e-14);
  CHECK(std::fabs(std_normal_cdf(1.0) - oracle::kPhi_1) <= 1e-14);
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    CHECK(std::fabs(std_normal_cdf(-x) - (1.0 - std_normal_cdf(x))) <= 1e-15);
    CHECK(std_normal_cdf(x) <= std_normal_cdf(x + 0.01));
  }
}

TEST_CASE("std_normal_quantile boundaries, round trip and symmetry") {
  CHECK(std_normal_quantile(0.5).value() == 0.0);
  CHECK(std_normal_quantile(0.0).is_minus_infinity());
  CHECK(std_normal_quantile(1.0).is_plus_infinity());
  CHECK_THROWS_AS(std_normal_quantile(-0.1), DomainError);
  CHECK_THROWS_AS(std_normal_quantile(1.5), DomainError);
  CHECK(std::fabs(std_normal_quantile(oracle::kPhi_2_3).value() - 2.3) <= 1e-12);

  // 10^4 log-spaced probabilities down to 1e-300.
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double p = std::pow(10.0, -300.0 + i * (300.0 + std::log10(0.5)) / 9999.0);
    const double back = std_normal_cdf(std_normal_quantile(p).value());
    worst = std::max(worst, std::fabs(back - p) / p);
  }
  CHECK(worst <= 1e-10);
  // q = fl(1 - p) and 1 - q is then exact, so the pair is exactly complementary.
  for (double p = 1e-12; p < 1.0 - 1e-12; p *= 1.37) {
    const double q = 1.0 - p;
    CHECK(std::fabs(std_normal_quantile(q).value() + std_normal_quantile(1.0 - q).value()) <= 1e-12);
  }
}

TEST_CASE("std_normal_quantile symmetry on a representable grid") {
  // 1 - p is exact for these p, so the check isolates the quantile itself.
  for (int k = 1; k < 1024; ++k) {
    const double p = k / 1024.0;
    CHECK(std::fabs(std_normal_quantile(1.0 - p).value() + std_normal_quantile(p).value()) <= 1e-12);
  }
}

TEST_CASE("gauss_hermite_rule small orders and moments") {
  const auto r1 = gauss_hermite_rule(1);
  REQUIRE(r1.nodes.size() == 1);
  CHECK(r1.nodes[0] == doctest::Approx(0.0));
  CHECK(r1.weights[0] == doctest::Approx(1.0));
  const auto r2 = gauss_hermite_rule(2);
  CHECK(r2.nodes[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(r2.nodes[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r2.weights[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(gauss_hermite_rule(0), ConfigurationError);
  CHECK_THROWS_AS(gauss_hermite_rule(129), ConfigurationError);

  for (int order : {1, 2, 3, 5, 8, 16, 32, 40, 64, 100, 128}) {
    const auto r = gauss_hermite_rule(order);
    double wsum = 0.0, m2 = 0.0;
    for (int i = 0; i < order; ++i) {
      CHECK(r.weights[i] > 0.0);
      wsum += r.weights[i];
      m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
    }
    CHECK(std::fabs(wsum - 1.0) <= 1e-14);
    if (order >= 2) CHECK(std::fabs(m2 - 1.0) <= 1e-12);
    if (order > 64) continue;
    // Exact for x^k, k <= 2 order - 1: odd -> 0, even -> (k-1)!!.
    for (int k = 0; k <= 2 * order - 1; ++k) {
      // Odd moments vanish by cancellation, so they are measured against sum |w x^k|.
      long double moment = 0.0L, magnitude = 0.0L;
      for (int i = 0; i < order; ++i) {
        const long double term = r.weights[i] * std::pow(static_cast<long double>(r.nodes[i]), k);
        moment += term;
        magnitude += std::fabs(term);
      }
      long double expected = 0.0L;
      if (k % 2 == 0) {
        expected = 1.0L;
        for (int j = k - 1; j > 1; j -= 2) expected *= j;
      }
      const long double scale = std::max(1.0L, k % 2 == 0 ? expected : magnitude);
      CHECK(static_cast<double>(std::fabs(moment - expected) / scale) <= 1e-10);
    }
  }
}

TEST_CASE("gaussian_integral on the linear families") {
  const auto rule = gauss_hermite_rule(40);
  const auto ramp = [](std::span<const double> x) { return std_normal_cdf(x[0] + 1.0); };
  CHECK(std::fabs(gaussian_integral(ramp, 1, rule).value - oracle::kPhi_inv_sqrt2) <= 1e-10);
  const auto constant = [](std::span<const double>) { return 0.3; };
  CHECK(gaussian_integral(constant, 2, rule).value == doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(gaussian_integral(constant, 4, rule), ConfigurationError);
  CHECK_THROWS_AS(gaussian_integral(constant, 0, rule), DomainError);

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + trial % 3;
    std::vector<double> a(dim);
    double norm2 = 0.0;
    for (double& v : a) {
      v = unif(gen);
      norm2 += v * v;
    }
    const double b = unif(gen);
    const auto f = [&](std::span<const double> x) {
      double s = b;
      for (int i = 0; i < dim; ++i) s += a[i] * x[i];
      return std_normal_cdf(s);
    };
    const double exact = std_normal_cdf(b / std::sqrt(1.0 + norm2));
    CHECK(std::fabs(gaussian_integral(f, dim, rule).value - exact) <= 1e-9);
  }
}

TEST_CASE("Monte Carlo gaussian_integral reports a usable standard error") {
  const std::vector<double> a{0.4, -0.3, 0.2, 0.5, -0.1};
  const auto f = [&](std::span<const double> x) {
    double s = 0.2;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * x[i];
    return std_normal_cdf(s);
  };
  double norm2 = 0.0;
  for (double v : a) norm2 += v * v;
  const auto est = gaussian_integral(f, 5, MonteCarloConfig{200000, 11});
  CHECK(est.std_error > 0.0);
  CHECK(std::fabs(est.value - std_normal_cdf(0.2 / std::sqrt(1.0 + norm2))) <= 3.0 * est.std_error);
  const auto again = gaussian_integral(f, 5, MonteCarloConfig{200000, 11});
  CHECK(again.value == est.value);
}

TEST_CASE("interval mass and density ratio helpers") {
  CHECK(std_normal_interval_mass(-kInf, kInf) == 1.0);
  CHECK(std::fabs(std_normal_interval_mass(-1.4, 1.4) - (2 * oracle::kPhi_1_4 - 1)) <= 1e-15);
  CHECK(std_normal_interval_mass(30.0, 31.0) > 0.0);
  CHECK(std_normal_pdf_ratio(40.0, 40.0) == doctest::Approx(1.0));
  CHECK(std::fabs(std_normal_pdf_ratio(1.0, 0.0) - std_normal_pdf(1.0) / std_normal_pdf(0.0)) <= 1e-15);
}
