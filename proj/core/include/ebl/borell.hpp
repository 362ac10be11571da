#pragma once

#include <span>
#include <vector>

#include "ebl/extended_real.hpp"
#include "ebl/function_spec.hpp"
#include "ebl/heat.hpp"

namespace ebl {

/// Tolerance of the exact-or-epsilon rule for the degenerate boundaries.
inline constexpr double kRegimeEpsilon = 1e-12;

enum class Regime {
  nondegenerate,  // sum > 1 and lambda_1 - rest < 1
  sum_one,        // sum of coefficients = 1 (rho = 1 for m = 2)
  diff_one,       // lambda_1 - rest = 1 (rho = -1 for m = 2)
  convex,         // lambda_1 - rest > 1; valid only for concave data
};

const char* to_string(Regime r);

/// Regime of descending-sortable positive coefficients. Throws DomainError
/// for a nonpositive entry and RegimeError when the sum is below 1.
Regime classify_regime(std::span<const double> lambdas);

struct InstanceFlags {
  bool convex_regime = false;  // drop the |lambda - mu| <= 1 requirement
  bool trivial_case = false;   // allow a.e.-constant 0/1 functions
};

/// Coefficients (lambda, mu) with the triple (f, g, h) of common dimension.
class BorellInstance {
 public:
  BorellInstance(double lambda, double mu, FunctionSpec f, FunctionSpec g, FunctionSpec h,
                 InstanceFlags flags = {});

  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  const FunctionSpec& f() const { return f_; }
  const FunctionSpec& g() const { return g_; }
  const FunctionSpec& h() const { return h_; }
  const InstanceFlags& flags() const { return flags_; }
  int dim() const { return f_.dim(); }
  double rho() const { return rho_; }
  Regime regime() const;

 private:
  double lambda_;
  double mu_;
  FunctionSpec f_;
  FunctionSpec g_;
  FunctionSpec h_;
  InstanceFlags flags_;
  double rho_;
};

/// m-function instance; coefficients are stored in descending order with the
/// functions permuted alongside.
class MInstance {
 public:
  MInstance(std::vector<double> lambdas, std::vector<FunctionSpec> fs, FunctionSpec h, InstanceFlags flags = {});

  const std::vector<double>& lambdas() const { return lambdas_; }
  const std::vector<FunctionSpec>& fs() const { return fs_; }
  const FunctionSpec& h() const { return h_; }
  const InstanceFlags& flags() const { return flags_; }
  int dim() const { return h_.dim(); }
  int m() const { return static_cast<int>(fs_.size()); }
  Regime regime() const;

 private:
  std::vector<double> lambdas_;
  std::vector<FunctionSpec> fs_;
  FunctionSpec h_;
  InstanceFlags flags_;
};

/// (1 - lambda^2 - mu^2) / (2 lambda mu), snapped to exactly +-1 on the
/// degenerate boundaries by the exact-or-epsilon rule.
double rho(double lambda, double mu);

/// Phi^{-1}(integral of f against gamma_n), exact infinities for trivial f.
ExtendedReal gaussian_quantile_mass(const FunctionSpec& f);

/// C(t,x,y) = u_h(t, lambda x + mu y) - lambda u_f(t,x) - mu u_g(t,y), t > 0.
double c_value(const BorellInstance& inst, double t, std::span<const double> x, std::span<const double> y);

/// Phi^{-1}(int h) - lambda Phi^{-1}(int f) - mu Phi^{-1}(int g) with the
/// extended-real convention; equal infinities on both sides count as 0.
ExtendedReal deficit(const BorellInstance& inst);
ExtendedReal deficit_m(const MInstance& inst);

struct Drift {
  Vector b1;
  Vector b2;
};

/// b(t,x,y) = -1/2 [u_f (grad u_h + grad u_f); u_g (grad u_h + grad u_g)], t in (0,1).
Drift drift_b(const BorellInstance& inst, double t, std::span<const double> x, std::span<const double> y,
              GradientScheme scheme = AnalyticGradient{});

enum class TimeStencil {
  forward,  // (C(t+dt) - C(t)) / dt, error O(dt)
  central,  // (C(t+dt) - C(t-dt)) / (2 dt), error O(dt^2)
};

struct PdeSteps {
  double dt = 1e-5;
  double dx = 1e-3;
  TimeStencil time = TimeStencil::forward;
};

/// Individual terms of the parabolic equation at one point.
struct PdeTerms {
  double dc_dt = 0.0;
  double diffusion = 0.0;  // 1/2 Delta_rho C
  double transport = 0.0;  // <b, grad C>
  double reaction = 0.0;   // -1/2 |grad u_h|^2 C
  double residual() const { return dc_dt - diffusion - transport - reaction; }
};

/// Finite-difference evaluation of both sides of
/// dC/dt = 1/2 Delta_rho C + <b, grad C> - 1/2 |grad u_h|^2 C.
/// Requires 2 dt <= t <= 1 - 2 dt (ConfigurationError otherwise).
PdeTerms pde_terms(const BorellInstance& inst, double t, std::span<const double> x, std::span<const double> y,
                   const PdeSteps& steps = {});

/// |LHS - RHS| of the equation above.
double pde_residual(const BorellInstance& inst, double t, std::span<const double> x, std::span<const double> y,
                    const PdeSteps& steps = {});

}  // namespace ebl
