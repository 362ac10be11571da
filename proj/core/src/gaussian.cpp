#include "ebl/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "ebl/errors.hpp"
#include "ebl/random.hpp"

namespace ebl {

std::string ExtendedReal::to_string() const {
  if (is_plus_infinity()) return "+inf";
  if (is_minus_infinity()) return "-inf";
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

ExtendedReal inequality_gap(ExtendedReal lhs, ExtendedReal rhs) {
  if (!lhs.is_finite() && lhs == rhs) return ExtendedReal(0.0);
  return lhs - rhs;
}

std::ostream& operator<<(std::ostream& os, ExtendedReal x) { return os << x.to_string(); }

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) {
  if (std::isnan(x)) throw DomainError("std_normal_cdf: NaN argument");
  // erfc keeps full relative accuracy in the lower tail; the upper tail is
  // 1 - (small), where absolute accuracy is what matters.
  return 0.5 * std::erfc(-x / kSqrt2);
}

double std_normal_cdf(ExtendedReal x) {
  if (x.is_minus_infinity()) return 0.0;
  if (x.is_plus_infinity()) return 1.0;
  return std_normal_cdf(x.value());
}

double std_normal_pdf_ratio(double a, double b) { return std::exp(0.5 * (b - a) * (b + a)); }

double std_normal_interval_mass(double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  // Work in whichever tail keeps both CDF values small.
  if (lo + hi > 0.0) return std_normal_cdf(-lo) - std_normal_cdf(-hi);
  return std_normal_cdf(hi) - std_normal_cdf(lo);
}

namespace {

// Wichura's AS241 (PPND16), about 1e-16 relative accuracy before refinement.
double quantile_initial(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

}  // namespace

ExtendedReal std_normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("std_normal_quantile: p outside [0,1]");
  if (p == 0.0) return ExtendedReal::minus_infinity();
  if (p == 1.0) return ExtendedReal::plus_infinity();
  double x = quantile_initial(p);
  // One Halley step against the erfc-based CDF. The residual is formed in the
  // tail that holds the probability mass exactly.
  const double residual = x <= 0.0 ? std_normal_cdf(x) - p : (1.0 - p) - std_normal_cdf(-x);
  const double density = std_normal_pdf(x);
  if (density > 0.0) {
    const double u = residual / density;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return ExtendedReal(x);
}

QuadratureRule gauss_hermite_rule(int order) {
  if (order < 1 || order > 128) throw ConfigurationError("gauss_hermite_rule: order must be in [1,128]");
  const int n = order;
  std::vector<double> x(n), w(n);
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) <= 1e-15 * std::max(1.0, std::fabs(z))) {
        // Re-evaluate the derivative at the converged root for the weight.
        p1 = pim4;
        p2 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
        }
        pp = std::sqrt(2.0 * n) * p2;
        break;
      }
    }
    if (n % 2 == 1 && i == half - 1) z = 0.0;
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = w[n - 1 - i] = 2.0 / (pp * pp);
  }
  QuadratureRule rule;
  rule.order = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    // Ascending nodes.
    rule.nodes[i] = kSqrt2 * x[n - 1 - i];
    rule.weights[i] = w[n - 1 - i] * inv_sqrt_pi;
    total += rule.weights[i];
  }
  for (double& wi : rule.weights) wi /= total;
  return rule;
}

QuadratureRule gauss_legendre_rule(int order) {
  if (order < 1 || order > 512) throw ConfigurationError("gauss_legendre_rule: order must be in [1,512]");
  const int n = order;
  QuadratureRule rule;
  rule.order = n;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) <= 1e-16) break;
    }
    if (n % 2 == 1 && i == half - 1) z = 0.0;
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return rule;
}

IntegralEstimate gaussian_integral(const PointFunction& f, int dim, const QuadratureRule& rule) {
  if (dim <= 0) throw DomainError("gaussian_integral: dimension must be positive");
  if (dim > 3) throw ConfigurationError("gaussian_integral: tensor quadrature is limited to dim <= 3");
  const int k = rule.order;
  std::vector<int> idx(dim, 0);
  std::vector<double> point(dim);
  double sum = 0.0;
  for (;;) {
    double weight = 1.0;
    for (int d = 0; d < dim; ++d) {
      point[d] = rule.nodes[idx[d]];
      weight *= rule.weights[idx[d]];
    }
    sum += weight * f(point);
    int d = 0;
    while (d < dim && ++idx[d] == k) idx[d++] = 0;
    if (d == dim) break;
  }
  return {std::clamp(sum, 0.0, 1.0), 0.0};
}

IntegralEstimate gaussian_integral(const PointFunction& f, int dim, const MonteCarloConfig& mc) {
  if (dim <= 0) throw DomainError("gaussian_integral: dimension must be positive");
  if (mc.samples < 2) throw ConfigurationError("gaussian_integral: need at least 2 Monte Carlo samples");
  CounterRng rng(mc.seed, 0);
  std::normal_distribution<double> normal;
  std::vector<double> point(dim);
  double mean = 0.0, m2 = 0.0;
  for (std::uint64_t s = 0; s < mc.samples; ++s) {
    for (double& c : point) c = normal(rng);
    const double v = f(point);
    const double delta = v - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (v - mean);
  }
  const double n = static_cast<double>(mc.samples);
  return {std::clamp(mean, 0.0, 1.0), std::sqrt(m2 / (n - 1.0) / n)};
}

}  // namespace ebl
