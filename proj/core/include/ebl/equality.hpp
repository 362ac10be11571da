#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ebl/borell.hpp"

namespace ebl {

enum class EqualityCase { h1, h2, common_concave, reflection, trivial, strict, unclassified };

const char* to_string(EqualityCase c);
/// Inverse of to_string; nullopt for unknown labels.
std::optional<EqualityCase> parse_equality_case(const std::string& label);

struct EqualityVerdict {
  EqualityCase case_label = EqualityCase::unclassified;
  ExtendedReal deficit = ExtendedReal(0.0);
  Regime regime = Regime::nondegenerate;
  /// Fit errors per candidate family (+inf when a family does not apply).
  std::map<std::string, double> residuals;
  double deficit_tol = 0.0;
};

/// Parameters of make_equality_instance. Which fields are read depends on the family.
struct EqualityParams {
  std::vector<double> lambdas;            // m >= 2 coefficients
  Vector a;                               // h1, h2: common direction (its size fixes n)
  std::vector<double> offsets;            // h1, h2: b_1..b_m
  std::optional<ConcavePWL> v;            // common_concave, reflection
  bool grid = false;                      // common_concave: sample Phi(V) on a quantile grid (n = 1)
  int trivial_branch = 1;                 // trivial: 1 (h = 1, f_1 = 1) or 2 (h = 0, f_1 = 0)
  int n = 1;                              // trivial: dimension
};

using AnyInstance = std::variant<BorellInstance, MInstance>;

/// Instance realizing one equality family. m = 2 yields a BorellInstance.
/// Throws RegimeError on a coefficient/family mismatch and DomainError on
/// missing or inconsistent parameters.
AnyInstance make_equality_instance(EqualityCase family, const EqualityParams& params);

/// The m-function view of any instance (coefficients descending).
MInstance as_m_instance(const AnyInstance& inst);

struct ClassifyOptions {
  std::optional<double> deficit_tol;  // default 1e-8, or 1e-5 when a grid is involved
  double residual_tol = 1e-6;
  double t = 0.5;                     // time of the heat-image fits
};

EqualityVerdict classify_equality(const AnyInstance& inst, const ClassifyOptions& options = {});

struct ConditionA {
  bool holds = false;
  bool convex_regime_holds = false;
};

/// sum l_i >= 1 and 2 max l_i <= 1 + sum l_i (exact-or-epsilon on the boundary).
ConditionA condition_a_check(std::span<const double> lambdas);

/// Equality verdict for inputs with a trivial (a.e. 0 or 1) function; requires at least one.
bool trivial_case_verdict(std::span<const double> lambdas, std::span<const FunctionSpec> fs, const FunctionSpec& h);

/// For lambda = 1 + mu: coefficients (mu/lambda, 1/lambda) with
/// h~ = 1 - f, f~ = g(-.), g~ = 1 - h. Then deficit(dual) = deficit / lambda.
BorellInstance dual_transform(const BorellInstance& inst);

/// Phi^{-1}(h~(x)) = Phi^{-1}(h(lambda x)) / lambda for h with a symbolic concave quantile.
FunctionSpec convex_rescale(const FunctionSpec& h, double lambda);

struct FeasibleMu {
  double lambda = 0.0;
  double mu = 0.0;
  std::vector<double> lambdas_tilde;  // lambda_i / mu for i >= 2
};

/// mu = min(1 + lambda_1, sum_{i>=2} lambda_i) for descending coefficients satisfying (A).
FeasibleMu feasible_mu(std::span<const double> lambdas);

struct SupConvolutionGrid {
  double x_radius = 8.0;  // output grid on [-x_radius, x_radius]
  int x_points = 161;
  double z_radius = 6.0;  // search truncation for z_3..z_m
  int z_points = 121;     // per coordinate, coarse and refinement passes alike
};

struct SupConvolution {
  FunctionSpec h_tilde;           // quantile-encoded grid
  double resolution_bound = 0.0;  // bound on the search and interpolation error in Phi^{-1} units
};

/// Phi^{-1}(h~(x)) = sup over z_3..z_m of
///   l_2 Phi^{-1}(f_2((x - sum_{i>=3} l_i z_i) / l_2)) + sum_{i>=3} l_i Phi^{-1}(f_i(z_i)),
/// by nested grid search refined once. Requires 2 or 3 one-dimensional functions.
SupConvolution sup_convolution(std::span<const FunctionSpec> fs, std::span<const double> lambdas_tilde,
                               const SupConvolutionGrid& grid = {});

}  // namespace ebl
