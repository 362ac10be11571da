#include "ebl/gaussian_set.hpp"

#include <algorithm>
#include <cmath>

#include "ebl/errors.hpp"

namespace ebl {

namespace {

double norm(const Vector& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

// lambda * x with the convention lambda * (+-inf) = +-inf for lambda > 0.
double scaled(double lambda, double x) { return std::isinf(x) ? x : lambda * x; }

}  // namespace

int set_dim(const GaussianSet& s) {
  return std::visit(
      [](const auto& r) -> int {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, HalfspaceSet>) return static_cast<int>(r.a.size());
        if constexpr (std::is_same_v<T, IntervalUnion>) return 1;
        if constexpr (std::is_same_v<T, BoxSet>) return r.box.dim();
      },
      s);
}

bool contains(const GaussianSet& s, std::span<const double> x) {
  if (static_cast<int>(x.size()) != set_dim(s)) throw DomainError("contains: dimension mismatch");
  return std::visit(
      [&](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, HalfspaceSet>) {
          double v = r.b;
          for (std::size_t i = 0; i < r.a.size(); ++i) v += r.a[i] * x[i];
          return v >= 0.0;
        } else if constexpr (std::is_same_v<T, IntervalUnion>) {
          return std::any_of(r.intervals.begin(), r.intervals.end(),
                             [&](const ClosedInterval& iv) { return x[0] >= iv.lo && x[0] <= iv.hi; });
        } else {
          return r.box.contains(x);
        }
      },
      s);
}

IntervalUnion normalized(std::vector<ClosedInterval> intervals) {
  std::erase_if(intervals, [](const ClosedInterval& iv) { return !(iv.lo <= iv.hi); });
  std::sort(intervals.begin(), intervals.end(),
            [](const ClosedInterval& a, const ClosedInterval& b) { return a.lo < b.lo; });
  IntervalUnion out;
  for (const auto& iv : intervals) {
    if (!out.intervals.empty() && iv.lo <= out.intervals.back().hi) {
      out.intervals.back().hi = std::max(out.intervals.back().hi, iv.hi);
    } else {
      out.intervals.push_back(iv);
    }
  }
  return out;
}

GaussianSet minkowski_combine(std::span<const GaussianSet> sets, std::span<const double> lambdas) {
  if (sets.empty()) throw DomainError("minkowski_combine: no sets given");
  if (sets.size() != lambdas.size()) throw DomainError("minkowski_combine: one coefficient per set");
  for (double l : lambdas) {
    if (!(l > 0.0)) throw DomainError("minkowski_combine: coefficients must be positive");
  }
  const auto variant = sets.front().index();
  const int dim = set_dim(sets.front());
  for (const auto& s : sets) {
    if (s.index() != variant) throw DomainError("minkowski_combine: sets must share a representation");
    if (set_dim(s) != dim) throw DomainError("minkowski_combine: sets must share a dimension");
  }

  if (std::holds_alternative<IntervalUnion>(sets.front())) {
    IntervalUnion acc{{{0.0, 0.0}}};
    for (std::size_t k = 0; k < sets.size(); ++k) {
      const auto& next = std::get<IntervalUnion>(sets[k]);
      if (next.intervals.empty()) return IntervalUnion{};
      std::vector<ClosedInterval> sums;
      for (const auto& a : acc.intervals) {
        for (const auto& b : next.intervals) {
          sums.push_back({a.lo + scaled(lambdas[k], b.lo), a.hi + scaled(lambdas[k], b.hi)});
        }
      }
      acc = normalized(std::move(sums));
    }
    return acc;
  }

  if (std::holds_alternative<BoxSet>(sets.front())) {
    Box out{Vector(dim, 0.0), Vector(dim, 0.0)};
    for (std::size_t k = 0; k < sets.size(); ++k) {
      const auto& b = std::get<BoxSet>(sets[k]).box;
      for (int d = 0; d < dim; ++d) {
        out.lo[d] += scaled(lambdas[k], b.lo[d]);
        out.hi[d] += scaled(lambdas[k], b.hi[d]);
      }
    }
    return BoxSet{out};
  }

  // Parallel halfspaces: lambda {<u,x> + b >= 0} = {<u,z> + lambda b >= 0}.
  const auto& first = std::get<HalfspaceSet>(sets.front());
  const double n0 = norm(first.a);
  if (n0 == 0.0) throw UnsupportedError("minkowski_combine: degenerate halfspace normal");
  Vector unit(first.a);
  for (double& v : unit) v /= n0;
  double offset = 0.0;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const auto& h = std::get<HalfspaceSet>(sets[k]);
    const double nk = norm(h.a);
    if (nk == 0.0) throw UnsupportedError("minkowski_combine: degenerate halfspace normal");
    for (int d = 0; d < dim; ++d) {
      if (std::fabs(h.a[d] / nk - unit[d]) > 1e-12) {
        throw UnsupportedError("minkowski_combine: only parallel halfspaces are supported");
      }
    }
    offset += lambdas[k] * h.b / nk;
  }
  return HalfspaceSet{unit, offset};
}

FunctionSpec set_to_indicator(const GaussianSet& s) {
  return std::visit(
      [](const auto& r) -> FunctionSpec {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, HalfspaceSet>) {
          return FunctionSpec::halfspace(r.a, r.b);
        } else if constexpr (std::is_same_v<T, IntervalUnion>) {
          if (r.intervals.empty()) return FunctionSpec::constant(0.0, 1);
          // Degenerate points carry no Gaussian mass.
          std::vector<ClosedInterval> proper;
          for (const auto& iv : r.intervals) {
            if (iv.lo < iv.hi) proper.push_back(iv);
          }
          if (proper.empty()) return FunctionSpec::constant(0.0, 1);
          return FunctionSpec::intervals(std::move(proper));
        } else {
          return FunctionSpec::box(r.box);
        }
      },
      s);
}

}  // namespace ebl
