#include "catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ebl/random.hpp"
#include "ebl/version.hpp"
#include "pool.hpp"

namespace ebl::scenario {

namespace {

constexpr double kBViolationFloor = -1e-10;
constexpr std::size_t kCatalogBSamples = 2000;

/// Uniform draws in [lo, hi) from one counter stream.
class Uniform {
 public:
  Uniform(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}
  double operator()(double lo, double hi) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  CounterRng rng_;
};

/// Coefficients with sum > 1 and lambda_1 - rest < 1, both with margin 0.05.
std::vector<double> nondegenerate_lambdas(Uniform& u, int m) {
  for (;;) {
    std::vector<double> l(static_cast<std::size_t>(m));
    for (auto& v : l) v = u(0.3, 1.3);
    std::sort(l.begin(), l.end(), std::greater<>());
    double sum = 0.0;
    for (double v : l) sum += v;
    if (sum >= 1.05 && 2.0 * l[0] - sum <= 0.95) return l;
  }
}

std::vector<double> sum_one_lambdas(Uniform& u, int m) {
  std::vector<double> l(static_cast<std::size_t>(m));
  double sum = 0.0;
  for (auto& v : l) sum += (v = u(0.2, 1.0));
  for (auto& v : l) v /= sum;
  return l;
}

std::vector<double> diff_one_lambdas(Uniform& u, int m) {
  std::vector<double> l(static_cast<std::size_t>(m));
  double rest = 0.0;
  for (std::size_t i = 1; i < l.size(); ++i) rest += (l[i] = u(0.2, 0.8));
  l[0] = 1.0 + rest;
  return l;
}

Vector direction(Uniform& u, int n) {
  for (;;) {
    Vector a(static_cast<std::size_t>(n));
    double norm2 = 0.0;
    for (auto& v : a) {
      v = u(-1.2, 1.2);
      norm2 += v * v;
    }
    if (norm2 >= 0.25) return a;
  }
}

/// Two or three affine pieces whose slopes differ by at least 0.8, so the
/// minimum is genuinely kinked and cannot be mistaken for a linear family.
ConcavePWL random_concave(Uniform& u, int n) {
  const int pieces = u(0.0, 1.0) < 0.5 ? 2 : 3;
  std::vector<AffinePiece> out;
  while (static_cast<int>(out.size()) < pieces) {
    AffinePiece p{Vector(static_cast<std::size_t>(n)), u(0.0, 1.0)};
    for (auto& v : p.slope) v = u(-1.5, 1.5);
    const bool separated = std::all_of(out.begin(), out.end(), [&](const AffinePiece& q) {
      double d2 = 0.0;
      for (int i = 0; i < n; ++i) d2 += (p.slope[i] - q.slope[i]) * (p.slope[i] - q.slope[i]);
      return d2 >= 0.64;
    });
    if (separated) out.push_back(std::move(p));
  }
  return ConcavePWL(std::move(out));
}

std::string row_id(const char* family, int i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s-%02d", family, i);
  return buf;
}

FunctionSpec interval(double lo, double hi) { return FunctionSpec::intervals({{lo, hi}}); }

}  // namespace

std::vector<CatalogEntry> equality_fixtures(std::uint64_t seed) {
  const EqualityCase families[] = {EqualityCase::h1, EqualityCase::h2, EqualityCase::common_concave,
                                   EqualityCase::reflection, EqualityCase::trivial};
  std::vector<CatalogEntry> out;
  for (const EqualityCase family : families) {
    for (int i = 0; i < kCatalogRowsPerFamily; ++i) {
      const int n = 1 + i % 3;
      const int m = 2 + (i / 3) % 2;
      Uniform u(seed, static_cast<std::uint64_t>(family) * 1000 + static_cast<std::uint64_t>(i));
      EqualityParams p;
      bool grid = false;
      switch (family) {
        case EqualityCase::h1:
        case EqualityCase::h2:
          // Every fourth row sits on the sum-one boundary.
          p.lambdas = i % 4 == 3 ? sum_one_lambdas(u, m) : nondegenerate_lambdas(u, m);
          p.a = direction(u, n);
          for (int k = 0; k < m; ++k) p.offsets.push_back(u(-1.0, 1.0));
          break;
        case EqualityCase::common_concave:
          p.lambdas = sum_one_lambdas(u, m);
          p.v = random_concave(u, n);
          grid = i % 6 == 3;  // n = 1 on these rows
          p.grid = grid;
          break;
        case EqualityCase::reflection:
          p.lambdas = diff_one_lambdas(u, m);
          p.v = random_concave(u, n);
          break;
        default:
          p.lambdas = nondegenerate_lambdas(u, m);
          p.trivial_branch = 1 + i % 2;
          p.n = n;
          break;
      }
      out.push_back({row_id(to_string(family), i), to_string(family), family, grid, make_equality_instance(family, p)});
    }
  }
  return out;
}

std::vector<CatalogEntry> strict_fixtures() {
  const ConcavePWL v({{{1.0}, 0.5}, {{-2.0}, 1.0}});
  auto scaled_v = [&](double s) {
    std::vector<AffinePiece> pieces = v.pieces();
    for (auto& p : pieces) p.offset *= s;
    return FunctionSpec::concave_composite(ConcavePWL(pieces));
  };
  const FunctionSpec kinked = FunctionSpec::concave_composite(v);
  InstanceFlags convex;
  convex.convex_regime = true;
  auto entry = [](const char* name, AnyInstance inst) {
    return CatalogEntry{std::string("strict-") + name, "strict", EqualityCase::strict, false, std::move(inst)};
  };
  const auto ramp = [](double b) { return FunctionSpec::linear_gaussian({1.2}, b); };
  const auto cube = [](int n, double r) {
    return FunctionSpec::box({Vector(static_cast<std::size_t>(n), -r), Vector(static_cast<std::size_t>(n), r)});
  };
  std::vector<CatalogEntry> out;
  out.push_back(entry("S1", BorellInstance(0.7, 0.7, interval(-1, 1), interval(-1, 1), interval(-1.4, 1.4))));
  out.push_back(entry("S2", BorellInstance(0.7, 0.7, interval(-1, 1), interval(0, 2), interval(-0.7, 2.1))));
  out.push_back(entry("S3", BorellInstance(0.6, 0.6, FunctionSpec::intervals({{-2, -1}, {0.5, 3}}), interval(-1, 1),
                                           interval(-1.8, 2.4))));
  out.push_back(entry("S4", BorellInstance(0.7, 0.6, ramp(0.3), ramp(-0.2), ramp(0.7 * 0.3 - 0.6 * 0.2 + 0.1))));
  out.push_back(entry("S5", BorellInstance(0.7, 0.7, kinked, kinked, scaled_v(1.4))));
  out.push_back(entry("S6", BorellInstance(1.8, 0.5, kinked, kinked, scaled_v(2.3), convex)));
  out.push_back(entry("S7", BorellInstance(0.7, 0.7, cube(2, 1.0), cube(2, 1.0), cube(2, 1.4))));
  out.push_back(entry("S8", BorellInstance(0.7, 0.6, FunctionSpec::halfspace({1.0}, 0.3),
                                           FunctionSpec::halfspace({1.0}, -0.2), FunctionSpec::halfspace({1.0}, 0.5))));
  out.push_back(entry("S9", MInstance({0.5, 0.5, 0.5}, {interval(-1, 1), interval(-1, 1), interval(-1, 1)},
                                      interval(-1.5, 1.5))));
  out.push_back(entry("S10", BorellInstance(0.7, 0.7, cube(3, 1.0), cube(3, 1.0), cube(3, 1.4))));
  return out;
}

CatalogEntry negative_control() {
  const double lambda = 0.7, mu = 0.6, b1 = 0.3, b2 = -0.2;
  const Vector a{1.2};
  return {"control-h1-shift", "h1+0.1", EqualityCase::strict, false,
          BorellInstance(lambda, mu, FunctionSpec::linear_gaussian(a, b1), FunctionSpec::linear_gaussian(a, b2),
                         FunctionSpec::linear_gaussian(a, lambda * b1 + mu * b2 + 0.1))};
}

CatalogResult evaluate(const CatalogEntry& entry, std::size_t b_samples, std::uint64_t seed,
                       std::optional<double> deficit_tol) {
  CatalogResult r{entry, Regime::nondegenerate, ExtendedReal(0.0), EqualityVerdict{}, ExtendedReal(0.0), false};
  const MInstance view = as_m_instance(entry.instance);
  ClassifyOptions options;
  options.deficit_tol = deficit_tol;
  r.verdict = classify_equality(entry.instance, options);
  r.regime = r.verdict.regime;
  r.deficit = r.verdict.deficit;
  const bool label_ok = r.verdict.case_label == entry.expected;
  if (entry.expected == EqualityCase::strict) {
    r.pass = label_ok && r.deficit.value() > kStrictDeficitMin;
    return r;
  }
  r.b_violation = hypothesis_b_check(view.h(), view.fs(), view.lambdas(), b_samples, seed).max_violation;
  r.pass = label_ok && std::abs(r.deficit.value()) <= r.verdict.deficit_tol && !(r.b_violation.value() < kBViolationFloor);
  return r;
}

Report run_catalog(const RunOptions& options, const std::optional<std::string>& filter) {
  const std::uint64_t seed = options.seed.value_or(0);
  std::vector<CatalogEntry> rows = equality_fixtures(seed);
  for (auto& e : strict_fixtures()) rows.push_back(std::move(e));
  rows.push_back(negative_control());
  if (filter) {
    if (filter->empty()) throw ConfigError({std::string("filter")}, "empty catalog filter");
    std::erase_if(rows, [&](const CatalogEntry& e) {
      return e.id.find(*filter) == std::string::npos && e.family.find(*filter) == std::string::npos;
    });
    if (rows.empty()) throw ConfigError({std::string("filter")}, "no catalog row matches '" + *filter + "'");
  }

  const auto results = parallel_map(rows, [&](const CatalogEntry& e) {
    return evaluate(e, kCatalogBSamples, seed, options.tol);
  });

  Report rep;
  rep.id = "catalog";
  rep.csv_header = {"id", "family", "dim", "m", "regime", "deficit", "deficit_tol", "b_max_violation", "verdict",
                    "expected", "pass"};
  json rows_json = json::array();
  std::size_t failures = 0;
  for (const auto& r : results) {
    const MInstance view = as_m_instance(r.entry.instance);
    failures += r.pass ? 0 : 1;
    rows_json.push_back({{"id", r.entry.id},
                         {"family", r.entry.family},
                         {"dim", view.dim()},
                         {"m", view.m()},
                         {"grid", r.entry.grid},
                         {"regime", to_string(r.regime)},
                         {"deficit", extended_to_json(r.deficit)},
                         {"deficit_tol", r.verdict.deficit_tol},
                         {"b_max_violation", extended_to_json(r.b_violation)},
                         {"verdict", to_string(r.verdict.case_label)},
                         {"expected", to_string(r.entry.expected)},
                         {"pass", r.pass}});
    rep.csv_rows.push_back({r.entry.id, r.entry.family, std::to_string(view.dim()), std::to_string(view.m()),
                            to_string(r.regime), format_double(r.deficit.value()), format_double(r.verdict.deficit_tol),
                            format_double(r.b_violation.value()), to_string(r.verdict.case_label),
                            to_string(r.entry.expected), r.pass ? "true" : "false"});
  }
  std::sort(rep.csv_rows.begin(), rep.csv_rows.end());
  std::sort(rows_json.begin(), rows_json.end(),
            [](const json& a, const json& b) { return a["id"].get<std::string>() < b["id"].get<std::string>(); });
  rep.pass = failures == 0;
  rep.body = {{"id", "catalog"},
              {"command", "catalog"},
              {"seed", seed},
              {"version", library_version()},
              {"b_samples", kCatalogBSamples},
              {"rows", rows_json},
              {"failures", failures},
              {"pass", rep.pass}};
  return rep;
}

}  // namespace ebl::scenario
