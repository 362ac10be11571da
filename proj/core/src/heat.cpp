#include "ebl/heat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ebl/errors.hpp"
#include "ebl/random.hpp"

namespace ebl {

namespace {

constexpr double kWindow = 12.0;  // |z| beyond this carries < 4e-33 mass
constexpr double kChunk = 2.0;    // Gauss-Legendre panel width in z
constexpr int kHermiteOrder = 48;
constexpr std::uint64_t kMonteCarloSamples = 1 << 16;

double dot(std::span<const double> a, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * x[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("heat semigroup: t must be positive and finite");
}

const QuadratureRule& legendre16() {
  static const QuadratureRule rule = gauss_legendre_rule(16);
  return rule;
}

const QuadratureRule& hermite_default() {
  static const QuadratureRule rule = gauss_hermite_rule(kHermiteOrder);
  return rule;
}

// Q and 1 - Q carried separately so u keeps precision in both tails.
struct Jet {
  double q = 0.0;
  double qc = 0.0;
  double bias = 0.0;
};

double u_from_jet(const Jet& j) {
  if (j.q <= 0.5) return std_normal_quantile(std::clamp(j.q, 0.0, 1.0)).value();
  return -std_normal_quantile(std::clamp(j.qc, 0.0, 1.0)).value();
}

// f(w) and 1 - f(w) evaluated so that whichever is small stays accurate.
struct PointPair {
  double p;
  double pc;
};

// (Phi(v), Phi(-v)) with a single erfc; the smaller one carries full relative precision.
PointPair cdf_pair(double v) {
  if (v <= 0.0) {
    const double p = std_normal_cdf(v);
    return {p, 1.0 - p};
  }
  const double pc = std_normal_cdf(-v);
  return {1.0 - pc, pc};
}

PointPair point_pair(const FunctionSpec& f, std::span<const double> w) {
  if (const auto* g = f.as<GridSampled>(); g && g->encoding == GridEncoding::probability) {
    const double p = evaluate(f, w);
    return {p, 1.0 - p};
  }
  const ExtendedReal v = phi_inverse_of(f, w);
  if (v.is_finite()) return cdf_pair(v.value());
  return {std_normal_cdf(v), std_normal_cdf(-v)};
}

// Minimum over the affine pieces of a 1-D ConcavePWL and the slope attaining it.
std::pair<double, double> min_piece_1d(const ConcavePWL& v, double w) {
  double best = std::numeric_limits<double>::infinity(), slope = 0.0;
  for (const auto& p : v.pieces()) {
    const double val = p.slope[0] * w + p.offset;
    if (val < best) {
      best = val;
      slope = p.slope[0];
    }
  }
  return {best, slope};
}

// Integrates piecewise-smooth integrands against phi(z) over
// [z_lo, z_hi] split at `breaks` (sorted, in z units) and into unit chunks.
template <class Fn>
void for_each_legendre_node(double z_lo, double z_hi, const std::vector<double>& breaks, Fn&& fn) {
  const auto& rule = legendre16();
  std::vector<double> cuts;
  cuts.reserve(breaks.size() + 2);
  cuts.push_back(z_lo);
  for (double b : breaks) {
    if (b > z_lo && b < z_hi) cuts.push_back(b);
  }
  cuts.push_back(z_hi);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (!(b > a)) continue;
    const int chunks = std::max(1, static_cast<int>(std::ceil((b - a) / kChunk)));
    const double width = (b - a) / chunks;
    for (int c = 0; c < chunks; ++c) {
      const double left = a + c * width;
      const double half = 0.5 * width;
      const double mid = left + half;
      for (int i = 0; i < rule.order; ++i) {
        const double z = mid + half * rule.nodes[i];
        fn(z, half * rule.weights[i] * std_normal_pdf(z));
      }
    }
  }
}

// 1-D numeric route for concave composites and grids. `grad` may be empty.
Jet numeric_jet_1d(const FunctionSpec& f, double s, double x, std::span<double> grad) {
  std::vector<double> breaks_w;
  double dom_lo = -std::numeric_limits<double>::infinity();
  double dom_hi = std::numeric_limits<double>::infinity();
  const ConcavePWL* pwl = nullptr;
  if (const auto* cc = f.as<ConcaveComposite>()) {
    pwl = &cc->v;
    breaks_w = pwl->breakpoints_1d();
    if (pwl->domain()) {
      dom_lo = pwl->domain()->lo[0];
      dom_hi = pwl->domain()->hi[0];
    }
  } else if (const auto* g = f.as<GridSampled>()) {
    const int n = g->shape[0];
    for (int i = 0; i < n; ++i) breaks_w.push_back(g->box.lo[0] + (g->box.hi[0] - g->box.lo[0]) * i / (n - 1));
    if (g->outside == GridOutside::minus_infinity) {
      dom_lo = g->box.lo[0];
      dom_hi = g->box.hi[0];
    }
  } else {
    throw UnsupportedError("numeric heat route: unsupported representation");
  }
  const double z_dom_lo = (dom_lo - x) / s;
  const double z_dom_hi = (dom_hi - x) / s;
  const double z_lo = std::max(-kWindow, z_dom_lo);
  const double z_hi = std::min(kWindow, z_dom_hi);
  std::vector<double> breaks_z;
  breaks_z.reserve(breaks_w.size());
  for (double b : breaks_w) breaks_z.push_back((b - x) / s);

  Jet jet;
  // Mass outside the effective domain belongs to 1 - Q.
  jet.qc =(std::isfinite(z_dom_lo) ? std_normal_cdf(z_dom_lo) : 0.0) +
           (std::isfinite(z_dom_hi) ? std_normal_cdf(-z_dom_hi) : 0.0);
  jet.bias = 2.0 * std_normal_cdf(-kWindow);
  double dq = 0.0;
  double stein = 0.0;
  if (z_hi > z_lo) {
    double w1[1];
    for_each_legendre_node(z_lo, z_hi, breaks_z, [&](double z, double wt) {
      w1[0] = x + s * z;
      if (pwl) {
        const auto [v, slope] = min_piece_1d(*pwl, w1[0]);
        const PointPair pp = cdf_pair(v);
        jet.q += wt * pp.p;
        jet.qc += wt * pp.pc;
        if (!grad.empty()) dq += wt * std_normal_pdf(v) * slope;
      } else {
        const PointPair pp = point_pair(f, w1);
        jet.q += wt * pp.p;
        jet.qc += wt * pp.pc;
        if (!grad.empty()) stein += wt * pp.p * z;
      }
    });
  }
  if (!grad.empty()) {
    if (pwl) {
      // Jumps of f at the ends of its effective domain.
      if (std::isfinite(dom_lo) && z_dom_lo > -kWindow && z_dom_lo < kWindow) {
        const double v[1] = {dom_lo};
        dq += std_normal_cdf(pwl->value(v)) * std_normal_pdf(z_dom_lo) / s;
      }
      if (std::isfinite(dom_hi) && z_dom_hi > -kWindow && z_dom_hi < kWindow) {
        const double v[1] = {dom_hi};
        dq -= std_normal_cdf(pwl->value(v)) * std_normal_pdf(z_dom_hi) / s;
      }
      grad[0] = dq;
    } else {
      grad[0] = stein / s;
    }
  }
  return jet;
}

// Tensor Gauss-Hermite (dim <= 3) or Monte Carlo route in z.
Jet numeric_jet_nd(const FunctionSpec& f, double s, std::span<const double> x, std::span<double> grad) {
  const int dim = f.dim();
  const auto* cc = f.as<ConcaveComposite>();
  const bool slope_form = cc && !cc->v.domain();
  Jet jet;
  std::vector<double> w(dim), dq(dim, 0.0);
  auto accumulate = [&](std::span<const double> z, double weight) {
    for (int d = 0; d < dim; ++d) w[d] = x[d] + s * z[d];
    const PointPair pp = point_pair(f, w);
    jet.q += weight * pp.p;
    jet.qc += weight * pp.pc;
    if (grad.empty()) return;
    if (slope_form) {
      const double v = cc->v.value(w).value();
      const Vector slope = cc->v.active_slope(w);
      const double dens = std_normal_pdf(v);
      for (int d = 0; d < dim; ++d) dq[d] += weight * dens * slope[d];
    } else {
      for (int d = 0; d < dim; ++d) dq[d] += weight * pp.p * z[d] / s;
    }
  };
  if (dim <= 3) {
    const auto& rule = hermite_default();
    const int k = rule.order;
    std::vector<int> idx(dim, 0);
    std::vector<double> z(dim);
    for (;;) {
      double weight = 1.0;
      for (int d = 0; d < dim; ++d) {
        z[d] = rule.nodes[idx[d]];
        weight *= rule.weights[idx[d]];
      }
      accumulate(z, weight);
      int d = 0;
      while (d < dim && ++idx[d] == k) idx[d++] = 0;
      if (d == dim) break;
    }
    jet.bias = 2.0 * dim * std_normal_cdf(-rule.nodes.back());
  } else {
    CounterRng rng(0x4ea7, 0);
    std::normal_distribution<double> normal;
    std::vector<double> z(dim);
    const double weight = 1.0 / static_cast<double>(kMonteCarloSamples);
    for (std::uint64_t i = 0; i < kMonteCarloSamples; ++i) {
      for (double& c : z) c = normal(rng);
      accumulate(z, weight);
    }
    jet.bias = 1.0 / std::sqrt(static_cast<double>(kMonteCarloSamples));
  }
  for (int d = 0; d < static_cast<int>(grad.size()); ++d) grad[d] = dq[d];
  return jet;
}

Jet numeric_jet(const FunctionSpec& f, double s, std::span<const double> x, std::span<double> grad) {
  if (f.dim() == 1) return numeric_jet_1d(f, s, x[0], grad);
  return numeric_jet_nd(f, s, x, grad);
}

// Closed-form or numeric Q_t f(x), and dQ into `dq` when non-empty.
Jet heat_jet(const FunctionSpec& f, double t, std::span<const double> x, std::span<double> dq) {
  const double s = std::sqrt(t);
  return std::visit(
      [&](const auto& r) -> Jet {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LinearGaussian>) {
          const double k = std::sqrt(1.0 + t * dot(r.a, r.a));
          const double u = (dot(r.a, x) + r.b) / k;
          for (std::size_t d = 0; d < dq.size(); ++d) dq[d] = std_normal_pdf(u) * r.a[d] / k;
          return {std_normal_cdf(u), std_normal_cdf(-u), 0.0};
        } else if constexpr (std::is_same_v<T, HalfspaceIndicator>) {
          const double na = norm(r.a);
          const double z = dot(r.a, x) + r.b;
          if (na == 0.0) {
            std::fill(dq.begin(), dq.end(), 0.0);
            return z >= 0.0 ? Jet{1.0, 0.0, 0.0} : Jet{0.0, 1.0, 0.0};
          }
          const double u = z / (s * na);
          for (std::size_t d = 0; d < dq.size(); ++d) dq[d] = std_normal_pdf(u) * r.a[d] / (s * na);
          return {std_normal_cdf(u), std_normal_cdf(-u), 0.0};
        } else if constexpr (std::is_same_v<T, IntervalIndicator>) {
          Jet jet;
          double left = -std::numeric_limits<double>::infinity();
          double slope = 0.0;
          for (const auto& iv : r.intervals) {
            const double zl = (iv.lo - x[0]) / s;
            const double zh = (iv.hi - x[0]) / s;
            jet.q += std_normal_interval_mass(zl, zh);
            jet.qc += std_normal_interval_mass((left - x[0]) / s, zl);
            slope += (std::isfinite(zl) ? std_normal_pdf(zl) : 0.0) - (std::isfinite(zh) ? std_normal_pdf(zh) : 0.0);
            left = iv.hi;
          }
          jet.qc += std_normal_interval_mass((left - x[0]) / s, std::numeric_limits<double>::infinity());
          if (r.intervals.empty()) jet.qc = 1.0;
          if (!dq.empty()) dq[0] = slope / s;
          return jet;
        } else if constexpr (std::is_same_v<T, BoxIndicator>) {
          const int dim = r.box.dim();
          double q = 1.0;
          for (int d = 0; d < dim; ++d) q *= std_normal_interval_mass((r.box.lo[d] - x[d]) / s, (r.box.hi[d] - x[d]) / s);
          for (int d = 0; d < static_cast<int>(dq.size()); ++d) {
            double others = 1.0;
            for (int e = 0; e < dim; ++e) {
              if (e != d) others *= std_normal_interval_mass((r.box.lo[e] - x[e]) / s, (r.box.hi[e] - x[e]) / s);
            }
            const double zl = (r.box.lo[d] - x[d]) / s, zh = (r.box.hi[d] - x[d]) / s;
            const double edge =
                (std::isfinite(zl) ? std_normal_pdf(zl) : 0.0) - (std::isfinite(zh) ? std_normal_pdf(zh) : 0.0);
            dq[d] = others * edge / s;
          }
          return {q, 1.0 - q, 0.0};
        } else if constexpr (std::is_same_v<T, Constant>) {
          std::fill(dq.begin(), dq.end(), 0.0);
          return {r.c, 1.0 - r.c, 0.0};
        } else if constexpr (std::is_same_v<T, Complement>) {
          const Jet inner = heat_jet(*r.inner, t, x, dq);
          for (double& v : dq) v = -v;
          return {inner.qc, inner.q, inner.bias};
        } else {
          return numeric_jet(f, s, x, dq);
        }
      },
      f.rep());
}

void check_point(const FunctionSpec& f, std::span<const double> x) {
  if (static_cast<int>(x.size()) != f.dim()) throw DomainError("heat semigroup: point dimension mismatch");
}

void require_nontrivial(const FunctionSpec& f) {
  if (is_trivial(f)) throw TrivialFunctionError("u is undefined for a trivial function (Q_t f is 0 or 1)");
}

}  // namespace

HeatValue heat_apply_detailed(const FunctionSpec& f, double t, std::span<const double> x) {
  require_time(t);
  check_point(f, x);
  const Jet jet = heat_jet(f, t, x, {});
  return {std::clamp(jet.q, 0.0, 1.0), jet.bias};
}

double heat_apply(const FunctionSpec& f, double t, std::span<const double> x) {
  return heat_apply_detailed(f, t, x).value;
}

double heat_apply_quadrature(const FunctionSpec& f, double t, std::span<const double> x, int order) {
  require_time(t);
  check_point(f, x);
  const int dim = f.dim();
  const double s = std::sqrt(t);
  std::vector<double> w(dim);
  const auto shifted = [&](std::span<const double> z) {
    for (int d = 0; d < dim; ++d) w[d] = x[d] + s * z[d];
    return evaluate(f, w);
  };
  return gaussian_integral(shifted, dim, gauss_hermite_rule(order)).value;
}

double u_value(const FunctionSpec& f, double t, std::span<const double> x) {
  require_time(t);
  check_point(f, x);
  require_nontrivial(f);
  // Symbolic routes: no round trip through Phi.
  if (const auto* lg = f.as<LinearGaussian>()) {
    return (dot(lg->a, x) + lg->b) / std::sqrt(1.0 + t * dot(lg->a, lg->a));
  }
  if (const auto* hs = f.as<HalfspaceIndicator>()) {
    return (dot(hs->a, x) + hs->b) / (std::sqrt(t) * norm(hs->a));
  }
  if (const auto* cm = f.as<Complement>()) return -u_value(*cm->inner, t, x);
  return u_from_jet(heat_jet(f, t, x, {}));
}

double u_value_and_grad(const FunctionSpec& f, double t, std::span<const double> x, std::span<double> grad) {
  require_time(t);
  check_point(f, x);
  require_nontrivial(f);
  if (static_cast<int>(grad.size()) != f.dim()) throw DomainError("u_value_and_grad: gradient buffer size");
  if (const auto* lg = f.as<LinearGaussian>()) {
    const double k = std::sqrt(1.0 + t * dot(lg->a, lg->a));
    for (std::size_t d = 0; d < grad.size(); ++d) grad[d] = lg->a[d] / k;
    return (dot(lg->a, x) + lg->b) / k;
  }
  if (const auto* hs = f.as<HalfspaceIndicator>()) {
    const double k = std::sqrt(t) * norm(hs->a);
    for (std::size_t d = 0; d < grad.size(); ++d) grad[d] = hs->a[d] / k;
    return (dot(hs->a, x) + hs->b) / k;
  }
  if (const auto* cm = f.as<Complement>()) {
    const double u = -u_value_and_grad(*cm->inner, t, x, grad);
    for (double& g : grad) g = -g;
    return u;
  }
  if (const auto* iv = f.as<IntervalIndicator>()) {
    // dQ / phi(u) formed as density ratios to survive the tails.
    const double s = std::sqrt(t);
    const double u = u_from_jet(heat_jet(f, t, x, {}));
    double g = 0.0;
    for (const auto& piece : iv->intervals) {
      const double zl = (piece.lo - x[0]) / s, zh = (piece.hi - x[0]) / s;
      if (std::isfinite(zl)) g += std_normal_pdf_ratio(zl, u);
      if (std::isfinite(zh)) g -= std_normal_pdf_ratio(zh, u);
    }
    grad[0] = g / s;
    return u;
  }
  if (f.as<GridSampled>()) {
    const Vector g = u_grad(f, t, x, CentralDifference{});
    std::copy(g.begin(), g.end(), grad.begin());
    return u_value(f, t, x);
  }
  const Jet jet = heat_jet(f, t, x, grad);
  const double u = u_from_jet(jet);
  const double dens = std_normal_pdf(u);
  for (double& g : grad) g /= dens;
  return u;
}

Vector u_grad(const FunctionSpec& f, double t, std::span<const double> x, GradientScheme scheme) {
  const int dim = f.dim();
  Vector grad(dim);
  if (std::holds_alternative<AnalyticGradient>(scheme) && !f.as<GridSampled>()) {
    u_value_and_grad(f, t, x, grad);
    return grad;
  }
  const double h0 = std::holds_alternative<CentralDifference>(scheme) ? std::get<CentralDifference>(scheme).h : 0.0;
  require_time(t);
  check_point(f, x);
  Vector probe(x.begin(), x.end());
  for (int d = 0; d < dim; ++d) {
    const double h = h0 > 0.0 ? h0 : 1e-4 * std::max(1.0, std::fabs(x[d]));
    probe[d] = x[d] + h;
    const double up = u_value(f, t, probe);
    probe[d] = x[d] - h;
    const double down = u_value(f, t, probe);
    probe[d] = x[d];
    grad[d] = (up - down) / (2.0 * h);
  }
  return grad;
}

double u_second_derivative(const FunctionSpec& f, double t, std::span<const double> x, int i, int j, double h) {
  if (i < 0 || j < 0 || i >= f.dim() || j >= f.dim()) throw DomainError("u_second_derivative: axis out of range");
  if (!(h > 0.0)) throw ConfigurationError("u_second_derivative: step must be positive");
  Vector p(x.begin(), x.end());
  if (i == j) {
    const double centre = u_value(f, t, p);
    p[i] = x[i] + h;
    const double up = u_value(f, t, p);
    p[i] = x[i] - h;
    const double down = u_value(f, t, p);
    return (up - 2.0 * centre + down) / (h * h);
  }
  auto at = [&](double di, double dj) {
    p.assign(x.begin(), x.end());
    p[i] += di;
    p[j] += dj;
    return u_value(f, t, p);
  };
  return (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
}

FunctionSpec heat_invert_linear(double t, std::span<const double> a, double b) {
  require_time(t);
  const double na = norm(a);
  const double limit = 1.0 / std::sqrt(t);
  if (na > limit + 1e-12) {
    throw InconsistentLipschitzError("heat_invert_linear: |a| exceeds t^{-1/2}; no f has this heat image");
  }
  Vector slope(a.begin(), a.end());
  if (std::fabs(na - limit) <= 1e-9) return FunctionSpec::halfspace(std::move(slope), b);
  const double k = std::sqrt(1.0 - t * na * na);
  for (double& v : slope) v /= k;
  return FunctionSpec::linear_gaussian(std::move(slope), b / k);
}

}  // namespace ebl
