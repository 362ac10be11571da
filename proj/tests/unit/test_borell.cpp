#include <doctest.h>

#include <cmath>

#include "ebl/borell.hpp"
#include "ebl/errors.hpp"
#include "ebl/gaussian_set.hpp"
#include "oracles/oracles.hpp"

using namespace ebl;

namespace {

FunctionSpec interval(double lo, double hi) { return FunctionSpec::intervals({{lo, hi}}); }
FunctionSpec ramp(double a, double b) { return FunctionSpec::linear_gaussian({a}, b); }
FunctionSpec kinked() { return FunctionSpec::concave_composite(ConcavePWL({{{1.0}, 0.5}, {{-2.0}, 1.0}})); }

BorellInstance strict_intervals() { return BorellInstance(0.7, 0.7, interval(-1, 1), interval(-1, 1), interval(-1.4, 1.4)); }

double c1(const BorellInstance& inst, double t, double x, double y) {
  const double px[1] = {x}, py[1] = {y};
  return c_value(inst, t, px, py);
}

}  // namespace

TEST_CASE("rho and regime classification") {
  CHECK(rho(0.5, 0.5) == 1.0);
  CHECK(rho(1.5, 0.5) == -1.0);
  CHECK(rho(1.0, 1.0) == doctest::Approx(-0.5));
  CHECK(rho(0.3, 0.7) == 1.0);
  CHECK_THROWS_AS(rho(0.0, 1.0), DomainError);
  const double sum_one[] = {0.3, 0.7}, diff_one[] = {1.5, 0.5}, convex[] = {2.0, 0.5}, plain[] = {0.7, 0.7};
  CHECK(classify_regime(sum_one) == Regime::sum_one);
  CHECK(classify_regime(diff_one) == Regime::diff_one);
  CHECK(classify_regime(convex) == Regime::convex);
  CHECK(classify_regime(plain) == Regime::nondegenerate);
  const double small[] = {0.3, 0.3};
  CHECK_THROWS_AS(classify_regime(small), RegimeError);
}

TEST_CASE("instance construction enforces the invariants") {
  CHECK_THROWS_AS(BorellInstance(2.0, 0.5, ramp(1, 0), ramp(1, 0), ramp(1, 0)), RegimeError);
  InstanceFlags convex;
  convex.convex_regime = true;
  CHECK(BorellInstance(2.0, 0.5, ramp(1, 0), ramp(1, 0), ramp(1, 0), convex).regime() == Regime::convex);
  CHECK_THROWS_AS(BorellInstance(-0.5, 1.5, ramp(1, 0), ramp(1, 0), ramp(1, 0)), DomainError);
  CHECK_THROWS_AS(BorellInstance(0.5, 0.5, ramp(1, 0), FunctionSpec::linear_gaussian({1, 1}, 0), ramp(1, 0)),
                  DomainError);
  CHECK_THROWS_AS(BorellInstance(0.5, 0.5, FunctionSpec::constant(1.0), ramp(1, 0), ramp(1, 0)), PreconditionError);

  const MInstance m({0.2, 0.5, 0.3}, {ramp(1, 0.2), ramp(1, 0.5), ramp(1, 0.3)}, ramp(1, 0.38));
  CHECK(m.lambdas() == std::vector<double>{0.5, 0.3, 0.2});
  CHECK(*m.fs()[0].as<LinearGaussian>() == LinearGaussian{{1.0}, 0.5});
  CHECK(*m.fs()[2].as<LinearGaussian>() == LinearGaussian{{1.0}, 0.2});
}

TEST_CASE("c_value examples") {
  const BorellInstance h1(0.6, 0.6, ramp(1, 0.3), ramp(1, -0.1), ramp(1, 0.12));
  for (double t : {0.1, 0.5, 1.0}) {
    for (double x : {-2.0, 0.0, 1.3}) CHECK(std::fabs(c1(h1, t, x, 0.4 - x)) <= 1e-10);
  }
  const BorellInstance common(0.5, 0.5, kinked(), kinked(), kinked());
  CHECK(c1(common, 0.4, 0.8, 0.8) == 0.0);
  const BorellInstance skewed(0.3, 0.7, kinked(), kinked(), kinked());
  CHECK(std::fabs(c1(skewed, 0.4, 0.8, 0.8)) <= 1e-15);
  CHECK(std::fabs(c1(strict_intervals(), 0.5, 0.0, 0.0) - oracle::kStrictIntervalC_half) <= 1e-12);
  CHECK_THROWS_AS(c1(BorellInstance(0.5, 0.5, FunctionSpec::constant(1.0), ramp(1, 0), ramp(1, 0), {false, true}),
                     0.5, 0, 0),
                  TrivialFunctionError);
}

TEST_CASE("deficit examples and the trivial convention") {
  const GaussianSet a = IntervalUnion{{{-1.0, 1.0}}};
  const GaussianSet sets[] = {a, a};
  const double half[] = {0.5, 0.5};
  const FunctionSpec h = set_to_indicator(minkowski_combine(sets, half));
  CHECK(std::fabs(deficit(BorellInstance(0.5, 0.5, interval(-1, 1), interval(-1, 1), h)).value()) <= 1e-10);
  CHECK(std::fabs(deficit(strict_intervals()).value() - oracle::kStrictIntervalDeficit) <= 1e-12);

  const InstanceFlags trivial{false, true};
  const FunctionSpec zero = FunctionSpec::constant(0.0);
  CHECK(deficit(BorellInstance(0.6, 0.6, zero, ramp(1, 0), zero, trivial)) == ExtendedReal(0.0));
  CHECK(deficit(BorellInstance(0.6, 0.6, FunctionSpec::constant(1.0), ramp(1, 0), FunctionSpec::constant(1.0),
                               trivial)) == ExtendedReal(0.0));
  const BorellInstance h1(0.6, 0.6, ramp(1, 0.3), ramp(1, -0.1), ramp(1, 0.12));
  CHECK(std::fabs(deficit(h1).value() - c1(h1, 1.0, 0.0, 0.0)) <= 1e-9);
  const BorellInstance s = strict_intervals();
  CHECK(std::fabs(deficit(s).value() - c1(s, 1.0, 0.0, 0.0)) <= 1e-9);
}

TEST_CASE("deficit_m examples") {
  const MInstance as_pair({0.7, 0.7}, {interval(-1, 1), interval(-1, 1)}, interval(-1.4, 1.4));
  CHECK(deficit_m(as_pair) == deficit(strict_intervals()));
  const MInstance h1({0.5, 0.4, 0.3}, {ramp(1.1, 0.2), ramp(1.1, -0.4), ramp(1.1, 0.9)}, ramp(1.1, 0.21));
  CHECK(std::fabs(deficit_m(h1).value()) <= 1e-9);
  const MInstance common({0.5, 0.3, 0.2}, {kinked(), kinked(), kinked()}, kinked());
  CHECK(std::fabs(deficit_m(common).value()) <= 1e-9);
}

TEST_CASE("half-space instances have zero deficit across admissible coefficients") {
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double l = 0.5 + 0.3 * i, m = 0.5 + 0.3 * j;
      if (std::fabs(l - m) > 1.0) continue;
      const BorellInstance inst(l, m, FunctionSpec::halfspace({1.0}, 0.4), FunctionSpec::halfspace({1.0}, -0.3),
                                FunctionSpec::halfspace({1.0}, 0.4 * l - 0.3 * m));
      CHECK(std::fabs(deficit(inst).value()) <= 1e-12);
    }
  }
}

TEST_CASE("c_value is nonnegative on instances satisfying (B)") {
  const FunctionSpec kinked_h = FunctionSpec::concave_composite(ConcavePWL({{{1.0}, 0.7}, {{-2.0}, 1.4}}));
  const BorellInstance instances[] = {
      BorellInstance(0.6, 0.6, ramp(1, 0.3), ramp(1, -0.1), ramp(1, 0.12)),
      BorellInstance(0.6, 0.6, FunctionSpec::halfspace({1.0}, 0.3), FunctionSpec::halfspace({1.0}, -0.1),
                     FunctionSpec::halfspace({1.0}, 0.12)),
      BorellInstance(0.3, 0.7, kinked(), kinked(), kinked()),
      BorellInstance(0.7, 0.7, kinked(), kinked(), kinked_h),
      strict_intervals(),
  };
  for (const auto& inst : instances) {
    double worst = 0.0;
    for (double t : {0.25, 0.5, 0.75}) {
      for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) worst = std::min(worst, c1(inst, t, -2.0 + 0.2 * i, -2.0 + 0.2 * j));
      }
    }
    CHECK(worst >= -1e-8);
  }
}

TEST_CASE("drift_b examples") {
  const double x[1] = {0.3}, y[1] = {-0.4};
  const BorellInstance flat(0.6, 0.6, ramp(0, 0.2), ramp(0, -0.1), ramp(0, 0.06));
  const Drift zero = drift_b(flat, 0.5, x, y);
  CHECK(zero.b1[0] == 0.0);
  CHECK(zero.b2[0] == 0.0);

  const BorellInstance common(0.3, 0.7, kinked(), kinked(), kinked());
  const Drift sym = drift_b(common, 0.5, x, x);
  CHECK(sym.b1[0] == sym.b2[0]);

  // Closed form against the finite-difference built drift.
  const BorellInstance h1(0.6, 0.6, ramp(1.3, 0.3), ramp(1.3, -0.1), ramp(1.3, 0.12));
  const Drift exact = drift_b(h1, 0.4, x, y);
  const Drift fd = drift_b(h1, 0.4, x, y, CentralDifference{1e-4});
  CHECK(std::fabs(exact.b1[0] - fd.b1[0]) <= 1e-7);
  CHECK(std::fabs(exact.b2[0] - fd.b2[0]) <= 1e-7);
  const double k = std::sqrt(1.0 + 0.4 * 1.3 * 1.3);
  CHECK(exact.b1[0] == doctest::Approx(-0.5 * ((1.3 * 0.3 + 0.3) / k) * (2.0 * 1.3 / k)).epsilon(1e-14));
  CHECK_THROWS_AS(drift_b(h1, 1.0, x, y), DomainError);
}

TEST_CASE("pde_residual on smooth, constant and indicator instances") {
  const BorellInstance smooth(0.8, 0.7, ramp(0.5, 0.2), ramp(0.4, -0.1), ramp(0.45, 0.3));
  const double x[1] = {0.5}, y[1] = {-0.5};
  const double r1 = pde_residual(smooth, 0.5, x, y, {1e-5, 1e-3});
  const double r2 = pde_residual(smooth, 0.5, x, y, {5e-6, 1e-3});
  CHECK(r1 <= 1e-6);
  CHECK(r1 / r2 == doctest::Approx(2.0).epsilon(0.2));
  const PdeSteps central{1e-4, 1e-3, TimeStencil::central};
  CHECK(pde_residual(smooth, 0.5, x, y, central) <= 1e-8);

  const BorellInstance flat(0.6, 0.6, ramp(0, 0.2), ramp(0, -0.1), ramp(0, 0.06));
  CHECK(pde_residual(flat, 0.5, x, y, {1e-5, 1e-3}) <= 1e-12);

  const double o[1] = {0.0};
  CHECK(pde_residual(strict_intervals(), 0.5, o, o, {1e-5, 1e-3}) <= 1e-4);
  CHECK_THROWS_AS(pde_residual(smooth, 1e-5, x, y, {1e-5, 1e-3}), ConfigurationError);
  CHECK_THROWS_AS(pde_residual(smooth, 0.99999, x, y, {1e-5, 1e-3}), ConfigurationError);
}
