#include "ebl/equality.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ebl/errors.hpp"

namespace ebl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CaseName {
  EqualityCase c;
  const char* name;
};

constexpr CaseName kCaseNames[] = {
    {EqualityCase::h1, "H1"},
    {EqualityCase::h2, "H2"},
    {EqualityCase::common_concave, "common_concave"},
    {EqualityCase::reflection, "reflection"},
    {EqualityCase::trivial, "trivial"},
    {EqualityCase::strict, "strict"},
    {EqualityCase::unclassified, "unclassified"},
};

std::vector<double> sorted_descending(std::vector<double> l) {
  std::sort(l.begin(), l.end(), std::greater<>());
  return l;
}

bool involves_grid(const FunctionSpec& f) {
  if (f.as<GridSampled>()) return true;
  if (const auto* c = f.as<Complement>()) return involves_grid(*c->inner);
  return false;
}

// Phi^{-1} o f at x for the pointwise identity residuals.
double identity_gap(ExtendedReal a, ExtendedReal b) {
  if (a == b) return 0.0;
  if (!a.is_finite() || !b.is_finite()) return kInf;
  return std::fabs(a.value() - b.value());
}

// Deterministic probe grid on [-2.5, 2.5]^n for pointwise identities.
std::vector<Vector> identity_probes(int n) {
  const int per_axis = n == 1 ? 41 : n == 2 ? 13 : n == 3 ? 7 : 3;
  std::vector<Vector> pts;
  std::vector<int> idx(n, 0);
  for (;;) {
    Vector p(n);
    for (int d = 0; d < n; ++d) p[d] = -2.5 + 5.0 * idx[d] / (per_axis - 1);
    pts.push_back(std::move(p));
    int d = 0;
    while (d < n && ++idx[d] == per_axis) idx[d++] = 0;
    if (d == n) break;
  }
  return pts;
}

// Small point set for the affine fits: origin, +-0.8 e_i and two off-axis points.
std::vector<Vector> fit_probes(int n) {
  std::vector<Vector> pts;
  pts.emplace_back(n, 0.0);
  for (int d = 0; d < n; ++d) {
    Vector p(n, 0.0);
    p[d] = 0.8;
    pts.push_back(p);
    p[d] = -0.8;
    pts.push_back(p);
  }
  Vector q(n), r(n);
  for (int d = 0; d < n; ++d) {
    q[d] = 0.5;
    r[d] = d % 2 == 0 ? -0.6 : 0.3;
  }
  pts.push_back(q);
  pts.push_back(r);
  return pts;
}

struct AffineFit {
  Vector slope;
  double offset = 0.0;
  double residual = kInf;
};

// Least-squares fit of u_f(t, .) by an affine function on the probes.
AffineFit fit_affine(const FunctionSpec& f, double t, const std::vector<Vector>& probes) {
  const int n = f.dim();
  const auto k = static_cast<Eigen::Index>(probes.size());
  Eigen::MatrixXd A(k, n + 1);
  Eigen::VectorXd u(k);
  AffineFit fit;
  try {
    for (Eigen::Index i = 0; i < k; ++i) {
      for (int d = 0; d < n; ++d) A(i, d) = probes[i][d];
      A(i, n) = 1.0;
      u(i) = u_value(f, t, probes[i]);
      if (!std::isfinite(u(i))) return fit;
    }
  } catch (const Error&) {
    return fit;
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(u);
  fit.slope.assign(coef.data(), coef.data() + n);
  fit.offset = coef(n);
  fit.residual = (A * coef - u).lpNorm<Eigen::Infinity>();
  return fit;
}

double norm(const Vector& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

struct LinearFits {
  double h1 = kInf;
  double h2 = kInf;
  double affine = kInf;
  double slope = kInf;
  double offset = kInf;
  double lipschitz = kInf;
};

// Shared machinery of the (H1)/(H2) fits: affine heat images with a common
// slope whose heat inversions satisfy b_h = sum lambda_i b_i.
LinearFits fit_linear_families(const MInstance& inst, double t) {
  LinearFits out;
  const auto probes = fit_probes(inst.dim());
  std::vector<AffineFit> fits{fit_affine(inst.h(), t, probes)};
  if (!(fits[0].residual < 1e-3)) return out;
  for (const auto& f : inst.fs()) fits.push_back(fit_affine(f, t, probes));
  out.affine = 0.0;
  out.slope = 0.0;
  for (const auto& fit : fits) {
    out.affine = std::max(out.affine, fit.residual);
    if (!std::isfinite(fit.residual)) return out;
    double gap = 0.0;
    for (std::size_t d = 0; d < fit.slope.size(); ++d) gap = std::max(gap, std::fabs(fit.slope[d] - fits[0].slope[d]));
    out.slope = std::max(out.slope, gap);
  }
  // Every inverted function shares the slope, so offsets compare directly.
  double combo = 0.0;
  for (int i = 0; i < inst.m(); ++i) combo += inst.lambdas()[i] * fits[i + 1].offset;
  out.offset = std::fabs(fits[0].offset - combo);
  out.lipschitz = 0.0;
  for (const auto& fit : fits) out.lipschitz = std::max(out.lipschitz, std::fabs(norm(fit.slope) * std::sqrt(t) - 1.0));
  const double structural = std::max({out.affine, out.slope, out.offset});
  bool all_ramps = true, all_halfspaces = true;
  for (const auto& fit : fits) {
    try {
      const FunctionSpec inv = heat_invert_linear(t, fit.slope, fit.offset);
      all_ramps = all_ramps && inv.as<LinearGaussian>() != nullptr;
      all_halfspaces = all_halfspaces && inv.as<HalfspaceIndicator>() != nullptr;
    } catch (const InconsistentLipschitzError&) {
      all_ramps = all_halfspaces = false;
    }
  }
  if (all_ramps) out.h1 = structural;
  if (all_halfspaces) out.h2 = std::max(structural, out.lipschitz);
  return out;
}

double common_identity_residual(const MInstance& inst) {
  if (!has_concave_quantile(inst.h())) return kInf;
  double worst = 0.0;
  for (const auto& f : inst.fs()) {
    if (f == inst.h()) continue;
    for (const auto& p : identity_probes(inst.dim())) worst = std::max(worst, identity_gap(phi_inverse_of(inst.h(), p), phi_inverse_of(f, p)));
  }
  return worst;
}

double reflection_identity_residual(const MInstance& inst) {
  if (inst.m() < 2 || !has_concave_quantile(inst.fs()[1])) return kInf;
  double worst = 0.0;
  for (const auto& p : identity_probes(inst.dim())) {
    Vector minus(p);
    for (double& v : minus) v = -v;
    const ExtendedReal a = -phi_inverse_of(inst.h(), minus);
    const ExtendedReal b = -phi_inverse_of(inst.fs()[0], minus);
    for (int i = 1; i < inst.m(); ++i) {
      const ExtendedReal c = phi_inverse_of(inst.fs()[i], p);
      worst = std::max({worst, identity_gap(a, c), identity_gap(b, c)});
    }
  }
  return worst;
}

}  // namespace

const char* to_string(EqualityCase c) {
  for (const auto& e : kCaseNames) {
    if (e.c == c) return e.name;
  }
  return "unknown";
}

std::optional<EqualityCase> parse_equality_case(const std::string& label) {
  for (const auto& e : kCaseNames) {
    if (label == e.name) return e.c;
  }
  return std::nullopt;
}

MInstance as_m_instance(const AnyInstance& inst) {
  if (const auto* m = std::get_if<MInstance>(&inst)) return *m;
  const auto& b = std::get<BorellInstance>(inst);
  return MInstance({b.lambda(), b.mu()}, {b.f(), b.g()}, b.h(), b.flags());
}

AnyInstance make_equality_instance(EqualityCase family, const EqualityParams& params) {
  if (params.lambdas.size() < 2) throw DomainError("make_equality_instance: at least two coefficients");
  const std::vector<double> l = sorted_descending(params.lambdas);
  const Regime regime = classify_regime(l);
  const std::size_t m = l.size();
  InstanceFlags flags;
  std::vector<FunctionSpec> fs;
  std::optional<FunctionSpec> h;

  switch (family) {
    case EqualityCase::h1:
    case EqualityCase::h2: {
      if (params.a.empty()) throw DomainError("make_equality_instance: direction a is required");
      if (params.offsets.size() != m) throw DomainError("make_equality_instance: one offset per coefficient");
      // (A)-violating coefficients are admissible here since Phi^{-1} of these families is concave.
      flags.convex_regime = regime == Regime::convex;
      double b = 0.0;
      for (std::size_t i = 0; i < m; ++i) b += l[i] * params.offsets[i];
      const bool ramp = family == EqualityCase::h1;
      if (!ramp && norm(params.a) == 0.0) throw DomainError("make_equality_instance: H2 needs a nonzero direction");
      for (std::size_t i = 0; i < m; ++i) {
        fs.push_back(ramp ? FunctionSpec::linear_gaussian(params.a, params.offsets[i])
                          : FunctionSpec::halfspace(params.a, params.offsets[i]));
      }
      h = ramp ? FunctionSpec::linear_gaussian(params.a, b) : FunctionSpec::halfspace(params.a, b);
      break;
    }
    case EqualityCase::common_concave: {
      if (regime != Regime::sum_one) throw RegimeError("common_concave requires coefficients summing to 1");
      if (!params.v) throw DomainError("make_equality_instance: concave V is required");
      FunctionSpec f = FunctionSpec::concave_composite(*params.v);
      if (params.grid) {
        if (params.v->dim() != 1) throw UnsupportedError("make_equality_instance: grid option is 1-D only");
        GridSampled g{{{-8.0}, {8.0}}, {321}, {}, GridEncoding::quantile, GridOutside::extend_constant};
        for (int i = 0; i < 321; ++i) {
          const double x[1] = {-8.0 + 0.05 * i};
          g.values.push_back(params.v->value(x).value());
        }
        f = FunctionSpec::grid(std::move(g));
      }
      fs.assign(m, f);
      h = f;
      break;
    }
    case EqualityCase::reflection: {
      if (regime != Regime::diff_one) {
        throw RegimeError("reflection requires lambda_1 - sum of the others = 1");
      }
      if (!params.v) throw DomainError("make_equality_instance: concave V is required");
      const FunctionSpec base = FunctionSpec::concave_composite(*params.v);
      const FunctionSpec mirrored = complement(reflect(base));
      fs.push_back(mirrored);
      for (std::size_t i = 1; i < m; ++i) fs.push_back(base);
      h = mirrored;
      break;
    }
    case EqualityCase::trivial: {
      if (params.trivial_branch != 1 && params.trivial_branch != 2) {
        throw DomainError("make_equality_instance: trivial_branch must be 1 or 2");
      }
      flags.trivial_case = true;
      flags.convex_regime = regime == Regime::convex;
      const double c = params.trivial_branch == 1 ? 1.0 : 0.0;
      const int n = std::max(1, params.n);
      fs.push_back(FunctionSpec::constant(c, n));
      for (std::size_t i = 1; i < m; ++i) {
        Vector a(n, 0.0);
        a[0] = 1.0 + 0.5 * static_cast<double>(i);
        fs.push_back(FunctionSpec::linear_gaussian(std::move(a), 0.25 * static_cast<double>(i)));
      }
      h = FunctionSpec::constant(c, n);
      break;
    }
    default:
      throw DomainError("make_equality_instance: not an equality family");
  }
  if (m == 2) return BorellInstance(l[0], l[1], fs[0], fs[1], *h, flags);
  return MInstance(l, fs, *h, flags);
}

EqualityVerdict classify_equality(const AnyInstance& any, const ClassifyOptions& options) {
  const MInstance inst = as_m_instance(any);
  EqualityVerdict v;
  v.regime = inst.regime();
  bool grid = involves_grid(inst.h());
  for (const auto& f : inst.fs()) grid = grid || involves_grid(f);
  v.deficit_tol = options.deficit_tol.value_or(grid ? 1e-5 : 1e-8);
  v.deficit = deficit_m(inst);
  for (const char* key : {"H1", "H2", "common_concave", "reflection"}) v.residuals[key] = kInf;

  bool trivial = is_trivial(inst.h());
  for (const auto& f : inst.fs()) trivial = trivial || is_trivial(f);
  if (trivial) {
    const bool equal = trivial_case_verdict(inst.lambdas(), inst.fs(), inst.h());
    v.residuals["trivial"] = equal ? 0.0 : kInf;
    v.case_label = equal ? EqualityCase::trivial
                   : v.deficit > ExtendedReal(v.deficit_tol) ? EqualityCase::strict
                                                              : EqualityCase::unclassified;
    return v;
  }
  if (v.deficit > ExtendedReal(v.deficit_tol)) {
    v.case_label = EqualityCase::strict;
    return v;
  }
  if (v.deficit < ExtendedReal(-v.deficit_tol)) {
    // The inequality itself fails, so hypothesis (B) cannot hold.
    v.case_label = EqualityCase::unclassified;
    return v;
  }

  const LinearFits lin = fit_linear_families(inst, options.t);
  v.residuals["H1"] = lin.h1;
  v.residuals["H2"] = lin.h2;
  if (v.regime == Regime::sum_one) v.residuals["common_concave"] = common_identity_residual(inst);
  if (v.regime == Regime::diff_one) v.residuals["reflection"] = reflection_identity_residual(inst);

  const double tol = options.residual_tol;
  if (lin.h1 <= tol) {
    v.case_label = EqualityCase::h1;
  } else if (lin.h2 <= tol) {
    v.case_label = EqualityCase::h2;
  } else if (v.residuals["common_concave"] <= tol) {
    v.case_label = EqualityCase::common_concave;
  } else if (v.residuals["reflection"] <= tol) {
    v.case_label = EqualityCase::reflection;
  } else {
    v.case_label = EqualityCase::unclassified;
  }
  return v;
}

ConditionA condition_a_check(std::span<const double> lambdas) {
  if (lambdas.empty()) throw DomainError("condition_a_check: no coefficients");
  for (double l : lambdas) {
    if (!(l > 0.0)) throw DomainError("condition_a_check: coefficients must be positive");
  }
  const double sum = std::accumulate(lambdas.begin(), lambdas.end(), 0.0);
  const double top = *std::max_element(lambdas.begin(), lambdas.end());
  ConditionA out;
  out.convex_regime_holds = sum >= 1.0 - kRegimeEpsilon;
  out.holds = out.convex_regime_holds && 2.0 * top <= 1.0 + sum + kRegimeEpsilon;
  return out;
}

bool trivial_case_verdict(std::span<const double> lambdas, std::span<const FunctionSpec> fs, const FunctionSpec& h) {
  if (lambdas.size() != fs.size()) throw DomainError("trivial_case_verdict: one coefficient per function");
  const auto th = trivial_value(h);
  bool any_trivial = th.has_value(), some_one = false, some_zero = false;
  for (const auto& f : fs) {
    const auto tf = trivial_value(f);
    any_trivial = any_trivial || tf.has_value();
    some_one = some_one || tf == 1.0;
    some_zero = some_zero || tf == 0.0;
  }
  if (!any_trivial) throw PreconditionError("trivial_case_verdict: no trivial function present");
  if (th == 1.0) return some_one && !some_zero;
  if (th == 0.0) return some_zero;
  return false;
}

BorellInstance dual_transform(const BorellInstance& inst) {
  const double lambda = inst.lambda(), mu = inst.mu();
  if (std::fabs(lambda - (1.0 + mu)) > kRegimeEpsilon) throw RegimeError("dual_transform: requires lambda = 1 + mu");
  InstanceFlags flags;
  flags.trivial_case = inst.flags().trivial_case;
  // Constructor order is (f~, g~, h~).
  return BorellInstance(mu / lambda, 1.0 / lambda, reflect(inst.g()), complement(inst.h()), complement(inst.f()),
                        flags);
}

FunctionSpec convex_rescale(const FunctionSpec& h, double lambda) {
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw DomainError("convex_rescale: lambda must be >= 1");
  if (lambda == 1.0) return h;
  if (const auto* lg = h.as<LinearGaussian>()) return FunctionSpec::linear_gaussian(lg->a, lg->b / lambda);
  if (const auto* hs = h.as<HalfspaceIndicator>()) return FunctionSpec::halfspace(hs->a, hs->b / lambda);
  if (const auto* cc = h.as<ConcaveComposite>()) {
    // V(lambda x) / lambda: slopes unchanged, offsets and domain shrink by lambda.
    std::vector<AffinePiece> pieces = cc->v.pieces();
    for (auto& p : pieces) p.offset /= lambda;
    std::optional<Box> domain = cc->v.domain();
    if (domain) {
      for (double& v : domain->lo) v /= lambda;
      for (double& v : domain->hi) v /= lambda;
    }
    return FunctionSpec::concave_composite(ConcavePWL(std::move(pieces), std::move(domain)));
  }
  throw UnsupportedError("convex_rescale: needs a symbolic concave quantile (ramp, half-space or concave composite)");
}

FeasibleMu feasible_mu(std::span<const double> lambdas) {
  if (lambdas.size() < 2) throw DomainError("feasible_mu: at least two coefficients");
  if (!std::is_sorted(lambdas.begin(), lambdas.end(), std::greater<>())) {
    throw DomainError("feasible_mu: coefficients must be in descending order");
  }
  if (!condition_a_check(lambdas).holds) throw DomainError("feasible_mu: condition (A) does not hold");
  const double rest = std::accumulate(lambdas.begin() + 1, lambdas.end(), 0.0);
  FeasibleMu out;
  out.lambda = lambdas[0];
  out.mu = std::min(1.0 + lambdas[0], rest);
  for (std::size_t i = 1; i < lambdas.size(); ++i) out.lambdas_tilde.push_back(lambdas[i] / out.mu);
  return out;
}

SupConvolution sup_convolution(std::span<const FunctionSpec> fs, std::span<const double> lambdas_tilde,
                               const SupConvolutionGrid& grid) {
  if (fs.empty()) throw DomainError("sup_convolution: no functions");
  if (fs.size() != lambdas_tilde.size()) throw DomainError("sup_convolution: one coefficient per function");
  if (fs.size() < 2) throw DomainError("sup_convolution: needs at least two functions");
  if (fs.size() > 3) throw UnsupportedError("sup_convolution: grid search supports at most two inner variables");
  for (const auto& f : fs) {
    if (f.dim() != 1) throw UnsupportedError("sup_convolution: functions must be one-dimensional");
  }
  for (double l : lambdas_tilde) {
    if (!(l > 0.0)) throw DomainError("sup_convolution: coefficients must be positive");
  }
  if (grid.x_points < 3 || grid.z_points < 3 || !(grid.x_radius > 0.0) || !(grid.z_radius > 0.0)) {
    throw ConfigurationError("sup_convolution: grid too small");
  }
  const int inner = static_cast<int>(fs.size()) - 1;
  const double l2 = lambdas_tilde[0];
  const int nz = grid.z_points;

  const auto objective = [&](double x, const double* z) {
    double shift = x;
    ExtendedReal rest(0.0);
    for (int i = 0; i < inner; ++i) {
      shift -= lambdas_tilde[i + 1] * z[i];
      const double zi[1] = {z[i]};
      rest = rest + scale(lambdas_tilde[i + 1], phi_inverse_of(fs[i + 1], zi));
    }
    const double w[1] = {shift / l2};
    return scale(l2, phi_inverse_of(fs[0], w)) + rest;
  };

  struct Best {
    ExtendedReal value = ExtendedReal::minus_infinity();
    double z[2] = {0.0, 0.0};
    double slope = 0.0;  // largest finite |objective difference| / step seen in the pass
  };
  // One pass over an nz^inner lattice centred at `centre` with half-width `radius`.
  const auto search = [&](double x, const double* centre, double radius) {
    Best best;
    const double step = 2.0 * radius / (nz - 1);
    std::vector<double> prev_row(nz, std::numeric_limits<double>::quiet_NaN());
    const int outer = inner == 2 ? nz : 1;
    for (int a = 0; a < outer; ++a) {
      double prev = std::numeric_limits<double>::quiet_NaN();
      for (int b = 0; b < nz; ++b) {
        double z[2];
        z[0] = centre[0] - radius + step * b;
        z[1] = inner == 2 ? centre[1] - radius + step * a : 0.0;
        const ExtendedReal val = objective(x, z);
        if (val.is_finite()) {
          if (!std::isnan(prev)) best.slope = std::max(best.slope, std::fabs(val.value() - prev) / step);
          if (!std::isnan(prev_row[b])) best.slope = std::max(best.slope, std::fabs(val.value() - prev_row[b]) / step);
          prev = prev_row[b] = val.value();
        } else {
          prev = prev_row[b] = std::numeric_limits<double>::quiet_NaN();
        }
        if (val > best.value) {
          best.value = val;
          best.z[0] = z[0];
          best.z[1] = z[1];
        }
      }
    }
    return best;
  };

  GridSampled out{{{-grid.x_radius}, {grid.x_radius}}, {grid.x_points}, {}, GridEncoding::quantile,
                  GridOutside::extend_constant};
  out.values.resize(grid.x_points);
  const double coarse = 2.0 * grid.z_radius / (nz - 1);
  const double fine = 2.0 * coarse / (nz - 1);
  double search_bound = 0.0;
  const double origin[2] = {0.0, 0.0};
  for (int k = 0; k < grid.x_points; ++k) {
    const double x = -grid.x_radius + 2.0 * grid.x_radius * k / (grid.x_points - 1);
    const Best first = search(x, origin, grid.z_radius);
    Best second = first.value.is_finite() ? search(x, first.z, coarse) : first;
    if (first.value > second.value) second = first;
    out.values[k] = second.value.value();
    if (second.value.is_finite()) search_bound = std::max(search_bound, inner * second.slope * fine);
  }
  // Chord error of the piecewise-linear interpolant, bounded by the second differences.
  double interp_bound = 0.0;
  for (int k = 1; k + 1 < grid.x_points; ++k) {
    const double a = out.values[k - 1], b = out.values[k], c = out.values[k + 1];
    if (std::isfinite(a) && std::isfinite(b) && std::isfinite(c)) {
      interp_bound = std::max(interp_bound, std::fabs(a - 2.0 * b + c));
    }
  }
  return {FunctionSpec::grid(std::move(out)), search_bound + interp_bound + 1e-12};
}

}  // namespace ebl
