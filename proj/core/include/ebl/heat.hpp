#pragma once

#include <span>
#include <variant>

#include "ebl/function_spec.hpp"

namespace ebl {

/// Q_t f(x) together with a bound on the bias from truncating the Gaussian
/// integral (zero for closed forms).
struct HeatValue {
  double value = 0.0;
  double truncation_bias = 0.0;
};

/// Q_t f(x) = E f(x + sqrt(t) Z), Z ~ N(0, I).
///
/// Closed forms are used for the Gaussian ramp, half-space, interval, box and
/// constant representations; concave composites and grids are integrated
/// numerically (piecewise Gauss-Legendre in 1-D, tensor Gauss-Hermite of
/// order 48 up to dimension 3, seeded Monte Carlo above).
double heat_apply(const FunctionSpec& f, double t, std::span<const double> x);
HeatValue heat_apply_detailed(const FunctionSpec& f, double t, std::span<const double> x);

/// Heat semigroup evaluated by plain tensor Gauss-Hermite quadrature in the
/// integration variable z, ignoring closed forms. Used to cross-check them.
double heat_apply_quadrature(const FunctionSpec& f, double t, std::span<const double> x, int order = 48);

/// u_f(t,x) = Phi^{-1}(Q_t f(x)). Throws TrivialFunctionError for trivial f.
double u_value(const FunctionSpec& f, double t, std::span<const double> x);

struct AnalyticGradient {};
struct CentralDifference {
  double h = 0.0;  // 0 selects 1e-4 * max(1, |x_i|)
};
using GradientScheme = std::variant<AnalyticGradient, CentralDifference>;

/// Gradient of u_f(t, .) at x. The analytic scheme falls back to central
/// differences for grid-sampled functions.
Vector u_grad(const FunctionSpec& f, double t, std::span<const double> x,
              GradientScheme scheme = AnalyticGradient{});

/// u_f(t,x) and its analytic gradient written into `grad` (size dim).
/// Allocation-free for the closed-form representations.
double u_value_and_grad(const FunctionSpec& f, double t, std::span<const double> x, std::span<double> grad);

/// Second derivative d^2 u_f / dx_i dx_j by the 3-point (or 4-point mixed)
/// stencil with step h.
double u_second_derivative(const FunctionSpec& f, double t, std::span<const double> x, int i, int j,
                           double h = 1e-3);

/// Recovers f from Q_t f = Phi(<a,.> + b): a half-space indicator when
/// |a| = t^{-1/2} (within 1e-9), a Gaussian ramp when |a| < t^{-1/2}.
/// Throws InconsistentLipschitzError when |a| > t^{-1/2} + 1e-12.
FunctionSpec heat_invert_linear(double t, std::span<const double> a, double b);

}  // namespace ebl
