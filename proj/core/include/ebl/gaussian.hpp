#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ebl/extended_real.hpp"

namespace ebl {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kSqrt2 = 1.41421356237309504880168872421;

/// Standard normal density.
double std_normal_pdf(double x);

/// Standard normal CDF, Phi(x) = gamma_1((-inf, x]).
double std_normal_cdf(double x);
double std_normal_cdf(ExtendedReal x);

/// Phi^{-1}(p) for p in [0,1]; Phi^{-1}(0) = -inf and Phi^{-1}(1) = +inf.
/// Throws DomainError outside [0,1].
ExtendedReal std_normal_quantile(double p);

/// phi(a) / phi(b) evaluated without underflow.
double std_normal_pdf_ratio(double a, double b);

/// Probability of [lo, hi] under N(0,1); ends may be infinite.
double std_normal_interval_mass(double lo, double hi);

/// Nodes and weights of a rule that integrates against gamma_1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;
};

/// Gauss-Hermite rule with the probabilist normalization (weights sum to 1).
/// Exact for polynomials of degree <= 2*order-1. Valid orders: 1..128.
QuadratureRule gauss_hermite_rule(int order);

/// Gauss-Legendre rule on [-1, 1] (weights sum to 2).
QuadratureRule gauss_legendre_rule(int order);

struct MonteCarloConfig {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0x5eed;
};

struct IntegralEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for deterministic quadrature
};

using PointFunction = std::function<double(std::span<const double>)>;

/// Tensor-product quadrature of f against gamma_dim. dim must be 1..3.
IntegralEstimate gaussian_integral(const PointFunction& f, int dim, const QuadratureRule& rule);

/// Monte Carlo estimate of the integral of f against gamma_dim, any dim >= 1.
IntegralEstimate gaussian_integral(const PointFunction& f, int dim, const MonteCarloConfig& mc);

}  // namespace ebl
