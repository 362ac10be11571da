#include <doctest.h>

#include <cmath>

#include "ebl/diffusion.hpp"
#include "ebl/errors.hpp"

using namespace ebl;

namespace {

FunctionSpec ramp(double a, double b) { return FunctionSpec::linear_gaussian({a}, b); }
FunctionSpec kinked() { return FunctionSpec::concave_composite(ConcavePWL({{{1.0}, 0.5}, {{-2.0}, 1.0}})); }
FunctionSpec bent() {
  return FunctionSpec::concave_composite(ConcavePWL({{{0.8}, 0.1}, {{-0.6}, 0.4}, {{-1.5}, 1.2}}));
}
FunctionSpec interval(double lo, double hi) { return FunctionSpec::intervals({{lo, hi}}); }

SimConfig quick(std::size_t paths, std::uint64_t seed, double t_end = 0.5) {
  SimConfig cfg;
  cfg.n_paths = paths;
  cfg.seed = seed;
  cfg.t_end = t_end;
  return cfg;
}

double correlation(const std::vector<double>& draws, std::size_t count) {
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    sxy += draws[2 * i] * draws[2 * i + 1];
    sxx += draws[2 * i] * draws[2 * i];
    syy += draws[2 * i + 1] * draws[2 * i + 1];
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("SimConfig validation and time grid") {
  SimConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.t_end = 0.96;
  CHECK_THROWS_AS(validate(cfg), ConfigurationError);
  cfg.t_end = 0.9;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigurationError);
  cfg.dt = 0.2;
  cfg.t_end = 0.85;
  CHECK_THROWS_AS(validate(cfg), ConfigurationError);
  cfg.dt = 1e-3;
  cfg.n_paths = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigurationError);

  const auto grid = time_grid(0.25, 0.6);
  REQUIRE(grid.size() == 4);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 0.6);
  CHECK(grid[3] - grid[2] == doctest::Approx(0.1));
}

TEST_CASE("correlated_noise covariance structure") {
  const auto same = correlated_noise(1, 1.0, 0.01, 1000, 3);
  const auto flip = correlated_noise(1, -1.0, 0.01, 1000, 3);
  for (std::size_t i = 0; i < 1000; ++i) {
    CHECK(same[2 * i] == same[2 * i + 1]);
    CHECK(flip[2 * i] == -flip[2 * i + 1]);
    CHECK(flip[2 * i] == same[2 * i]);
  }
  const std::size_t count = 1000000;
  CHECK(std::fabs(correlation(correlated_noise(1, 0.0, 1.0, count, 5), count)) <= 4.0 / std::sqrt(count));
  CHECK(correlation(correlated_noise(1, -0.5, 1.0, count, 7), count) == doctest::Approx(-0.5).epsilon(0.008));
  CHECK(correlated_noise(1, 0.3, 0.5, 10, 9) == correlated_noise(1, 0.3, 0.5, 10, 9));
  CHECK_THROWS_AS(correlated_noise(1, 1.5, 0.01, 10, 0), DomainError);
}

TEST_CASE("simulate_paths starts at the origin and is reproducible") {
  const BorellInstance inst(0.7, 0.6, ramp(1.2, 0.3), ramp(0.8, -0.2), ramp(1.0, 0.1));
  const PathEnsemble a = simulate_paths(inst, quick(64, 17));
  const PathEnsemble b = simulate_paths(inst, quick(64, 17));
  const PathEnsemble c = simulate_paths(inst, quick(64, 18));
  CHECK(a.states == b.states);
  CHECK(a.accumulated_kill == b.accumulated_kill);
  CHECK(a.states != c.states);
  for (std::size_t p = 0; p < a.n_paths; ++p) {
    CHECK(a.x(p, 0, 0) == 0.0);
    CHECK(a.y(p, 0, 0) == 0.0);
    CHECK(a.kill(p, 0) == 0.0);
  }
  CHECK(a.noise.size() == a.n_paths * a.steps() * 2);
}

TEST_CASE("zero drift gives Brownian marginals and an exact Feynman-Kac value") {
  const BorellInstance flat(0.6, 0.6, ramp(0, 0.2), ramp(0, -0.1), ramp(0, 0.06));
  const std::size_t paths = 4000;
  const PathEnsemble ens = simulate_paths(flat, quick(paths, 1));
  const std::size_t K = ens.steps();
  double mean = 0.0, ss = 0.0;
  for (std::size_t p = 0; p < paths; ++p) mean += ens.x(p, K, 0);
  mean /= paths;
  for (std::size_t p = 0; p < paths; ++p) ss += (ens.x(p, K, 0) - mean) * (ens.x(p, K, 0) - mean);
  const double var = ss / (paths - 1);
  CHECK(std::fabs(var - 0.5) <= 4.0 * std::sqrt(2.0 / paths) * 0.5);

  const MonteCarloEstimate fk = feynman_kac_estimate(flat, 0.5, quick(200, 2));
  CHECK(std::fabs(fk.mean - (0.06 - 0.6 * 0.2 + 0.6 * 0.1)) <= 1e-15);
  CHECK(fk.std_error <= 1e-15);
  CHECK_THROWS_AS(feynman_kac_estimate(flat, 0.6, quick(10, 2)), DomainError);
}

TEST_CASE("Feynman-Kac estimates match the direct deficit") {
  const BorellInstance h1(0.6, 0.6, ramp(1.0, 0.3), ramp(1.0, -0.1), ramp(1.0, 0.12));
  const MonteCarloEstimate zero = feynman_kac_estimate(h1, 0.5, quick(2000, 4));
  CHECK(std::fabs(zero.mean) <= 3.0 * zero.std_error + 1e-12);

  const BorellInstance strict(0.7, 0.7, interval(-1, 1), interval(-1, 1), interval(-1.4, 1.4));
  const double target = deficit(strict).value();
  std::vector<MonteCarloEstimate> by_time;
  for (double t : {0.2, 0.5, 0.8}) {
    SimConfig cfg = quick(3000, 21, 0.8);
    const MonteCarloEstimate e = feynman_kac_estimate(strict, t, cfg);
    CHECK(std::fabs(e.mean - target) <= 4.0 * e.std_error);
    by_time.push_back(e);
  }
  for (std::size_t i = 0; i < by_time.size(); ++i) {
    for (std::size_t j = i + 1; j < by_time.size(); ++j) {
      const double se = std::hypot(by_time[i].std_error, by_time[j].std_error);
      CHECK(std::fabs(by_time[i].mean - by_time[j].mean) <= 3.0 * se);
    }
  }

  SimConfig anti = quick(2000, 5, 0.5);
  anti.antithetic = true;
  const MonteCarloEstimate paired = feynman_kac_estimate(strict, 0.5, anti);
  CHECK(paired.samples == 1000);
  CHECK(std::fabs(paired.mean - target) <= 4.0 * paired.std_error);
}

TEST_CASE("degenerate collapse onto the diagonal") {
  const BorellInstance common(0.5, 0.5, kinked(), kinked(), kinked());
  const SupportDiagnostics d = support_diagnostics(simulate_paths(common, quick(40, 8)));
  CHECK(d.max_abs_diagonal <= 1e-9);
  CHECK(d.diag_spread <= 1e-9);

  const BorellInstance half(0.5, 0.5, FunctionSpec::halfspace({1.0}, 0.3), FunctionSpec::halfspace({1.0}, -0.2),
                            FunctionSpec::halfspace({1.0}, 0.05));
  const SupportDiagnostics h = support_diagnostics(simulate_paths(half, quick(200, 9)));
  CHECK(h.max_diagonal_sd <= 1e-9);
  CHECK(h.max_abs_diagonal > 0.1);
}

TEST_CASE("support coverage separates generic from degenerate ensembles") {
  const double l = 1.0 / std::sqrt(3.0);
  const BorellInstance generic(l, l, ramp(0.6, 0.2), ramp(0.5, -0.1), ramp(0.7, 0.05));
  CHECK(generic.rho() == doctest::Approx(0.5));
  SimConfig cfg = quick(3000, 12, 0.9);
  const SupportDiagnostics g = support_diagnostics(simulate_paths(generic, cfg));
  REQUIRE(g.coverage.has_value());
  CHECK(*g.coverage > 0.5);
  CHECK(g.diag_spread > 0.1);

  const SupportDiagnostics single = support_diagnostics(simulate_paths(generic, quick(1, 12)));
  REQUIRE(single.coverage.has_value());
  CHECK(*single.coverage < 0.05);
  CHECK(single.diag_spread == 0.0);
}

TEST_CASE("lie_bracket_gap") {
  const BorellInstance common(0.3, 0.7, kinked(), kinked(), kinked());
  const BorellInstance h1(0.6, 0.6, ramp(1.2, 0.3), ramp(1.2, -0.1), ramp(1.2, 0.12));
  for (double t : {0.3, 0.5, 0.8}) {
    for (double x : {-0.7, 0.0, 1.1}) {
      CHECK(std::fabs(lie_bracket_gap(common, t, x, x)) <= 1e-6);
      CHECK(std::fabs(lie_bracket_gap(h1, t, x, 0.4 - x)) <= 1e-6);
    }
  }
  // Recorded witness for distinct strictly concave quantiles.
  const BorellInstance mixed(0.5, 0.5, kinked(), bent(), kinked());
  CHECK(std::fabs(lie_bracket_gap(mixed, 0.5, 0.0, 0.6)) > 1e-3);
  const BorellInstance plane(0.5, 0.5, FunctionSpec::linear_gaussian({1, 0}, 0), FunctionSpec::linear_gaussian({1, 0}, 0),
                             FunctionSpec::linear_gaussian({1, 0}, 0));
  CHECK_THROWS_AS(lie_bracket_gap(plane, 0.5, 0, 0), UnsupportedError);
}

TEST_CASE("minimizer identities") {
  const BorellInstance h1(0.6, 0.6, ramp(1.2, 0.3), ramp(1.2, -0.1), ramp(1.2, 0.12));
  const BorellInstance common(0.5, 0.5, kinked(), kinked(), kinked());
  const BorellInstance strict(0.7, 0.7, interval(-1, 1), interval(-1, 1), interval(-1.4, 1.4));
  for (double t : {0.3, 0.5, 0.8}) {
    for (double x : {-0.7, 0.4, 1.1}) {
      CHECK(minimizer_identities_check(h1, t, x, 0.2).max_abs() <= 1e-6);
      CHECK(minimizer_identities_check(common, t, x, x).max_abs() <= 1e-5);
    }
  }
  CHECK(minimizer_identities_check(strict, 0.5, 0.4, 0.2).max_abs() > 1e-2);
}

TEST_CASE("d1_d2_check") {
  const BorellInstance common(0.4, 0.6, kinked(), kinked(), kinked());
  const BorellInstance h1(0.4, 0.6, ramp(1.2, 0.3), ramp(1.2, -0.2), ramp(1.2, 0.0));
  const BorellInstance strict(0.5, 0.5, interval(-1, 1), interval(0, 2), interval(-1, 2));
  for (double x : {-0.7, 0.0, 0.4}) {
    CHECK(d1_d2_check(common, 0.5, x, x).verdict == DegenerateVerdict::d1);
    CHECK(d1_d2_check(h1, 0.5, x, x + 0.5).verdict == DegenerateVerdict::d2);
    CHECK(d1_d2_check(strict, 0.5, x, x + 0.5).verdict == DegenerateVerdict::neither);
  }
  // An (H1) instance with equal u-values at the point satisfies both.
  const BorellInstance same(0.5, 0.5, ramp(1.0, 0.0), ramp(1.0, 0.0), ramp(1.0, 0.0));
  CHECK(d1_d2_check(same, 0.5, 0.3, 0.3).verdict == DegenerateVerdict::both);
  CHECK(std::string(to_string(DegenerateVerdict::d1)) == "D1");
  const BorellInstance wide(0.7, 0.7, ramp(1, 0), ramp(1, 0), ramp(1, 0));
  CHECK_THROWS_AS(d1_d2_check(wide, 0.5, 0, 0), RegimeError);
}

TEST_CASE("diagonal_sde_check") {
  const BorellInstance common(0.5, 0.5, kinked(), kinked(), kinked());
  const SimConfig cfg = quick(8, 31, 0.4);
  CHECK(diagonal_sde_check(common, cfg) <= 1e-9);
  CHECK(diagonal_sde_check(common, cfg, 32) > 1e-3);
  const BorellInstance flat(0.5, 0.5, ramp(0, 0.2), ramp(0, 0.2), ramp(0, 0.2));
  CHECK(diagonal_sde_check(flat, cfg) == 0.0);
  const BorellInstance mixed(0.5, 0.5, kinked(), bent(), kinked());
  CHECK_THROWS_AS(diagonal_sde_check(mixed, cfg), DomainError);
}
