#include "ebl/borell.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ebl/errors.hpp"

namespace ebl {

namespace {

void require_positive(std::span<const double> lambdas) {
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("coefficients must be positive and finite");
  }
}

Vector combine(double lambda, std::span<const double> x, double mu, std::span<const double> y) {
  Vector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = lambda * x[i] + mu * y[i];
  return z;
}

void check_points(const BorellInstance& inst, std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<std::size_t>(inst.dim());
  if (x.size() != n || y.size() != n) throw DomainError("point dimension does not match the instance");
}

void check_regime(Regime r, const InstanceFlags& flags) {
  if (r == Regime::convex && !flags.convex_regime) {
    throw RegimeError("coefficients violate lambda_1 - sum of the rest <= 1; flag the instance convex-regime");
  }
}

}  // namespace

const char* to_string(Regime r) {
  switch (r) {
    case Regime::nondegenerate:
      return "nondegenerate";
    case Regime::sum_one:
      return "sum_one";
    case Regime::diff_one:
      return "diff_one";
    case Regime::convex:
      return "convex";
  }
  return "unknown";
}

Regime classify_regime(std::span<const double> lambdas) {
  if (lambdas.empty()) throw DomainError("classify_regime: no coefficients");
  require_positive(lambdas);
  const double sum = std::accumulate(lambdas.begin(), lambdas.end(), 0.0);
  const double top = *std::max_element(lambdas.begin(), lambdas.end());
  const double diff = top - (sum - top);
  if (std::fabs(sum - 1.0) <= kRegimeEpsilon) return Regime::sum_one;
  if (sum < 1.0) throw RegimeError("coefficients sum to less than 1");
  if (std::fabs(diff - 1.0) <= kRegimeEpsilon) return Regime::diff_one;
  if (diff > 1.0) return Regime::convex;
  return Regime::nondegenerate;
}

double rho(double lambda, double mu) {
  if (!(lambda > 0.0) || !(mu > 0.0)) throw DomainError("rho: coefficients must be positive");
  if (std::fabs(lambda + mu - 1.0) <= kRegimeEpsilon) return 1.0;
  if (std::fabs(std::fabs(lambda - mu) - 1.0) <= kRegimeEpsilon) return -1.0;
  return (1.0 - lambda * lambda - mu * mu) / (2.0 * lambda * mu);
}

BorellInstance::BorellInstance(double lambda, double mu, FunctionSpec f, FunctionSpec g, FunctionSpec h,
                               InstanceFlags flags)
    : lambda_(lambda), mu_(mu), f_(std::move(f)), g_(std::move(g)), h_(std::move(h)), flags_(flags) {
  const double l[2] = {lambda_, mu_};
  require_positive(l);
  if (f_.dim() != g_.dim() || f_.dim() != h_.dim()) throw DomainError("f, g, h must share a dimension");
  check_regime(classify_regime(l), flags_);
  if (!flags_.trivial_case && (is_trivial(f_) || is_trivial(g_) || is_trivial(h_))) {
    throw PreconditionError("trivial function in an instance not flagged trivial-case");
  }
  rho_ = ebl::rho(lambda_, mu_);
}

Regime BorellInstance::regime() const {
  const double l[2] = {lambda_, mu_};
  return classify_regime(l);
}

MInstance::MInstance(std::vector<double> lambdas, std::vector<FunctionSpec> fs, FunctionSpec h,
                     InstanceFlags flags)
    : h_(std::move(h)), flags_(flags) {
  if (lambdas.size() < 2) throw DomainError("MInstance: at least two functions are required");
  if (lambdas.size() != fs.size()) throw DomainError("MInstance: one coefficient per function");
  require_positive(lambdas);
  for (const auto& f : fs) {
    if (f.dim() != h_.dim()) throw DomainError("MInstance: functions must share a dimension");
  }
  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });
  for (std::size_t k : order) {
    lambdas_.push_back(lambdas[k]);
    fs_.push_back(fs[k]);
  }
  check_regime(classify_regime(lambdas_), flags_);
  if (!flags_.trivial_case) {
    bool trivial = is_trivial(h_);
    for (const auto& f : fs_) trivial = trivial || is_trivial(f);
    if (trivial) throw PreconditionError("trivial function in an instance not flagged trivial-case");
  }
}

Regime MInstance::regime() const { return classify_regime(lambdas_); }

ExtendedReal gaussian_quantile_mass(const FunctionSpec& f) {
  if (const auto c = trivial_value(f)) {
    return *c == 0.0 ? ExtendedReal::minus_infinity() : ExtendedReal::plus_infinity();
  }
  const Vector origin(f.dim(), 0.0);
  return ExtendedReal(u_value(f, 1.0, origin));
}

double c_value(const BorellInstance& inst, double t, std::span<const double> x, std::span<const double> y) {
  check_points(inst, x, y);
  const Vector z = combine(inst.lambda(), x, inst.mu(), y);
  return u_value(inst.h(), t, z) - inst.lambda() * u_value(inst.f(), t, x) - inst.mu() * u_value(inst.g(), t, y);
}

ExtendedReal deficit(const BorellInstance& inst) {
  const ExtendedReal rhs = scale(inst.lambda(), gaussian_quantile_mass(inst.f())) +
                           scale(inst.mu(), gaussian_quantile_mass(inst.g()));
  return inequality_gap(gaussian_quantile_mass(inst.h()), rhs);
}

ExtendedReal deficit_m(const MInstance& inst) {
  ExtendedReal rhs(0.0);
  for (int i = 0; i < inst.m(); ++i) rhs = rhs + scale(inst.lambdas()[i], gaussian_quantile_mass(inst.fs()[i]));
  return inequality_gap(gaussian_quantile_mass(inst.h()), rhs);
}

Drift drift_b(const BorellInstance& inst, double t, std::span<const double> x, std::span<const double> y,
              GradientScheme scheme) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("drift_b: t must lie in (0,1)");
  check_points(inst, x, y);
  const int n = inst.dim();
  const Vector z = combine(inst.lambda(), x, inst.mu(), y);
  const Vector gh = u_grad(inst.h(), t, z, scheme);
  const Vector gf = u_grad(inst.f(), t, x, scheme);
  const Vector gg = u_grad(inst.g(), t, y, scheme);
  const double uf = u_value(inst.f(), t, x);
  const double ug = u_value(inst.g(), t, y);
  Drift d{Vector(n), Vector(n)};
  for (int i = 0; i < n; ++i) {
    d.b1[i] = -0.5 * uf * (gh[i] + gf[i]);
    d.b2[i] = -0.5 * ug * (gh[i] + gg[i]);
  }
  return d;
}

PdeTerms pde_terms(const BorellInstance& inst, double t, std::span<const double> x, std::span<const double> y,
                   const PdeSteps& steps) {
  const double dt = steps.dt, dx = steps.dx;
  if (!(dt > 0.0) || !(dx > 0.0)) throw ConfigurationError("pde_residual: steps must be positive");
  if (t < 2.0 * dt || t > 1.0 - 2.0 * dt) {
    throw ConfigurationError("pde_residual: t must satisfy 2 dt <= t <= 1 - 2 dt");
  }
  check_points(inst, x, y);
  const int n = inst.dim();
  Vector xp(x.begin(), x.end()), yp(y.begin(), y.end());
  const auto C = [&](double tt) { return c_value(inst, tt, xp, yp); };

  PdeTerms terms;
  const double c0 = C(t);
  terms.dc_dt = steps.time == TimeStencil::forward ? (C(t + dt) - c0) / dt : (C(t + dt) - C(t - dt)) / (2.0 * dt);

  const Drift b = drift_b(inst, t, x, y);
  const double r = inst.rho();
  double laplace = 0.0, transport = 0.0;
  for (int i = 0; i < n; ++i) {
    xp[i] = x[i] + dx;
    const double cxp = C(t);
    xp[i] = x[i] - dx;
    const double cxm = C(t);
    xp[i] = x[i];
    yp[i] = y[i] + dx;
    const double cyp = C(t);
    yp[i] = y[i] - dx;
    const double cym = C(t);
    yp[i] = y[i];
    const auto corner = [&](double sx, double sy) {
      xp[i] = x[i] + sx * dx;
      yp[i] = y[i] + sy * dx;
      const double v = C(t);
      xp[i] = x[i];
      yp[i] = y[i];
      return v;
    };
    const double cxy = (corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)) / (4.0 * dx * dx);
    const double cxx = (cxp - 2.0 * c0 + cxm) / (dx * dx);
    const double cyy = (cyp - 2.0 * c0 + cym) / (dx * dx);
    laplace += cxx + 2.0 * r * cxy + cyy;
    transport += b.b1[i] * (cxp - cxm) / (2.0 * dx) + b.b2[i] * (cyp - cym) / (2.0 * dx);
  }
  terms.diffusion = 0.5 * laplace;
  terms.transport = transport;
  const Vector z = combine(inst.lambda(), x, inst.mu(), y);
  const Vector gh = u_grad(inst.h(), t, z);
  double norm2 = 0.0;
  for (double v : gh) norm2 += v * v;
  terms.reaction = -0.5 * norm2 * c0;
  return terms;
}

double pde_residual(const BorellInstance& inst, double t, std::span<const double> x, std::span<const double> y,
                    const PdeSteps& steps) {
  return std::fabs(pde_terms(inst, t, x, y, steps).residual());
}

}  // namespace ebl
