#include <doctest.h>

#include <cmath>
#include <random>

#include "ebl/equality.hpp"
#include "ebl/errors.hpp"
#include "ebl/heat.hpp"
#include "oracles/oracles.hpp"

using namespace ebl;

namespace {

FunctionSpec ramp(double a, double b) { return FunctionSpec::linear_gaussian({a}, b); }
FunctionSpec interval(double lo, double hi) { return FunctionSpec::intervals({{lo, hi}}); }
ConcavePWL kinked_v() { return ConcavePWL({{{1.0}, 0.5}, {{-2.0}, 1.0}}); }
FunctionSpec kinked() { return FunctionSpec::concave_composite(kinked_v()); }

EqualityParams linear_params(std::vector<double> lambdas, std::vector<double> offsets, Vector a = {1.0}) {
  EqualityParams p;
  p.lambdas = std::move(lambdas);
  p.offsets = std::move(offsets);
  p.a = std::move(a);
  return p;
}

EqualityParams concave_params(std::vector<double> lambdas, ConcavePWL v = kinked_v()) {
  EqualityParams p;
  p.lambdas = std::move(lambdas);
  p.v = std::move(v);
  return p;
}

double quantile_at(const FunctionSpec& f, double x) {
  const double p[1] = {x};
  return phi_inverse_of(f, p).value();
}

}  // namespace

TEST_CASE("case labels round trip through strings") {
  for (auto c : {EqualityCase::h1, EqualityCase::h2, EqualityCase::common_concave, EqualityCase::reflection,
                 EqualityCase::trivial, EqualityCase::strict, EqualityCase::unclassified}) {
    CHECK(parse_equality_case(to_string(c)) == c);
  }
  CHECK_FALSE(parse_equality_case("H3").has_value());
}

TEST_CASE("make_equality_instance examples") {
  const AnyInstance h1 = make_equality_instance(EqualityCase::h1, linear_params({0.6, 0.6}, {0.3, -0.1}));
  const auto& b1 = std::get<BorellInstance>(h1);
  CHECK(b1.h().as<LinearGaussian>()->b == doctest::Approx(0.12).epsilon(1e-15));
  CHECK(std::fabs(deficit(b1).value()) <= 1e-9);

  const AnyInstance h2 = make_equality_instance(EqualityCase::h2, linear_params({0.6, 0.6}, {0.3, -0.1}));
  CHECK(std::fabs(deficit(std::get<BorellInstance>(h2)).value()) <= 1e-9);

  const AnyInstance refl = make_equality_instance(EqualityCase::reflection, concave_params({1.5, 0.5}));
  CHECK(std::fabs(deficit(std::get<BorellInstance>(refl)).value()) <= 1e-8);

  const AnyInstance m3 = make_equality_instance(EqualityCase::h1, linear_params({0.5, 0.4, 0.3}, {0.2, -0.4, 0.9}));
  CHECK(std::holds_alternative<MInstance>(m3));

  CHECK_THROWS_AS(make_equality_instance(EqualityCase::common_concave, concave_params({0.6, 0.6})), RegimeError);
  CHECK_THROWS_AS(make_equality_instance(EqualityCase::reflection, concave_params({0.6, 0.6})), RegimeError);
  CHECK_THROWS_AS(make_equality_instance(EqualityCase::h1, linear_params({0.6, 0.6}, {0.3})), DomainError);
  CHECK_THROWS_AS(make_equality_instance(EqualityCase::strict, linear_params({0.6, 0.6}, {0.3, 0.1})), DomainError);
}

TEST_CASE("classification round trip on every family") {
  struct Case {
    EqualityCase family;
    EqualityParams params;
  };
  EqualityParams trivial2;
  trivial2.lambdas = {0.7, 0.6};
  trivial2.trivial_branch = 2;
  EqualityParams trivial1 = trivial2;
  trivial1.trivial_branch = 1;
  trivial1.n = 2;
  EqualityParams grid = concave_params({0.3, 0.7});
  grid.grid = true;
  const ConcavePWL plane({{{1.0, 0.5}, 0.2}, {{-0.5, 1.0}, 0.4}});
  const Case cases[] = {
      {EqualityCase::h1, linear_params({0.6, 0.6}, {0.3, -0.1})},
      {EqualityCase::h1, linear_params({0.7, 0.6}, {0.3, -0.2}, {0.8, -0.6})},
      {EqualityCase::h1, linear_params({1.8, 0.5}, {0.3, -0.2})},
      {EqualityCase::h2, linear_params({0.6, 0.6}, {0.3, -0.1})},
      {EqualityCase::h2, linear_params({0.5, 0.4, 0.3}, {0.3, -0.1, 0.2}, {0.6, 0.3, -0.4})},
      {EqualityCase::common_concave, concave_params({0.3, 0.7})},
      {EqualityCase::common_concave, concave_params({0.5, 0.3, 0.2}, plane)},
      {EqualityCase::common_concave, grid},
      {EqualityCase::reflection, concave_params({1.5, 0.5})},
      {EqualityCase::reflection, concave_params({1.6, 0.4, 0.2})},
      {EqualityCase::trivial, trivial1},
      {EqualityCase::trivial, trivial2},
  };
  for (const auto& c : cases) {
    const EqualityVerdict v = classify_equality(make_equality_instance(c.family, c.params));
    CAPTURE(to_string(c.family));
    CHECK(v.case_label == c.family);
    CHECK(std::fabs(v.deficit.value()) <= v.deficit_tol);
    if (c.family == EqualityCase::h1 || c.family == EqualityCase::h2) {
      CHECK(v.residuals.at(to_string(c.family)) <= 1e-7);
    }
  }
}

TEST_CASE("classify_equality on strict and unclassified instances") {
  const BorellInstance strict(0.7, 0.7, interval(-1, 1), interval(-1, 1), interval(-1.4, 1.4));
  const EqualityVerdict v = classify_equality(strict);
  CHECK(v.case_label == EqualityCase::strict);
  CHECK(std::fabs(v.deficit.value() - oracle::kStrictIntervalDeficit) <= 1e-12);

  // (B) fails here, so the deficit is negative and no family can apply.
  const BorellInstance broken(0.6, 0.6, ramp(1, 0.3), ramp(1, -0.1), ramp(1, 0.0));
  CHECK(classify_equality(broken).case_label == EqualityCase::unclassified);

  const InstanceFlags trivial{false, true};
  const BorellInstance constant_lead(0.6, 0.6, FunctionSpec::constant(1.0), ramp(1, 0), FunctionSpec::constant(1.0), trivial);
  CHECK(classify_equality(constant_lead).case_label == EqualityCase::trivial);
  const BorellInstance one_zero(0.6, 0.6, FunctionSpec::constant(1.0), FunctionSpec::constant(0.0),
                                FunctionSpec::constant(1.0), trivial);
  CHECK(classify_equality(one_zero).case_label == EqualityCase::strict);
}

TEST_CASE("H2 saturates the Lipschitz bound") {
  const auto inst = std::get<BorellInstance>(make_equality_instance(EqualityCase::h2, linear_params({0.6, 0.6}, {0.3, -0.1})));
  for (double t : {0.25, 0.5, 0.9}) {
    const double x[1] = {0.37};
    CHECK(std::fabs(u_grad(inst.h(), t, x)[0] * std::sqrt(t) - 1.0) <= 1e-6);
  }
}

TEST_CASE("condition_a_check examples") {
  const double a[] = {0.5, 0.5}, b[] = {2.0, 0.5}, c[] = {1.5, 0.5}, d[] = {0.3, 0.3};
  CHECK(condition_a_check(a).holds);
  CHECK_FALSE(condition_a_check(b).holds);
  CHECK(condition_a_check(b).convex_regime_holds);
  CHECK(condition_a_check(c).holds);
  CHECK_FALSE(condition_a_check(d).convex_regime_holds);
  const double bad[] = {0.5, 0.0};
  CHECK_THROWS_AS(condition_a_check(bad), DomainError);
}

TEST_CASE("trivial_case_verdict follows both branches") {
  const FunctionSpec one = FunctionSpec::constant(1.0), zero = FunctionSpec::constant(0.0);
  const double l[] = {0.6, 0.6};
  const FunctionSpec a[] = {one, ramp(1, 0)}, b[] = {one, zero}, c[] = {zero, ramp(1, 0)}, d[] = {ramp(1, 0), ramp(1, 1)};
  CHECK(trivial_case_verdict(l, a, one));
  CHECK_FALSE(trivial_case_verdict(l, b, one));
  CHECK(trivial_case_verdict(l, c, zero));
  CHECK_FALSE(trivial_case_verdict(l, a, zero));
  CHECK_FALSE(trivial_case_verdict(l, c, ramp(1, 0)));
  CHECK_THROWS_AS(trivial_case_verdict(l, d, ramp(1, 0)), PreconditionError);
}

TEST_CASE("dual_transform") {
  const BorellInstance strict(1.5, 0.5, interval(-1, 1), interval(-0.5, 2), interval(-1.8, 2.5));
  const BorellInstance dual = dual_transform(strict);
  CHECK(dual.lambda() == doctest::Approx(1.0 / 3.0));
  CHECK(dual.mu() == doctest::Approx(2.0 / 3.0));
  CHECK(dual.regime() == Regime::sum_one);
  CHECK(std::fabs(deficit(dual).value() * 1.5 - deficit(strict).value()) <= 1e-9);
  CHECK(deficit(strict).value() > 1e-3);

  const auto refl = std::get<BorellInstance>(make_equality_instance(EqualityCase::reflection, concave_params({1.5, 0.5})));
  const BorellInstance refl_dual = dual_transform(refl);
  CHECK(std::fabs(deficit(refl_dual).value()) <= 1e-9);
  CHECK(classify_equality(refl_dual).case_label == EqualityCase::common_concave);
  CHECK_THROWS_AS(dual_transform(BorellInstance(0.7, 0.7, ramp(1, 0), ramp(1, 0), ramp(1, 0))), RegimeError);
}

TEST_CASE("convex_rescale") {
  CHECK(convex_rescale(kinked(), 1.0) == kinked());
  CHECK(convex_rescale(ramp(2.0, 0.6), 2.0) == ramp(2.0, 0.3));
  const FunctionSpec h = kinked();
  const double lambda = 2.5;
  const FunctionSpec ht = convex_rescale(h, lambda);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = z(rng), y = z(rng);
    CHECK(quantile_at(ht, x) == doctest::Approx(quantile_at(h, lambda * x) / lambda).epsilon(1e-12));
    const double gap = quantile_at(h, lambda * (x + y) / 2.0) - 0.5 * lambda * (quantile_at(ht, x) + quantile_at(ht, y));
    worst = std::min(worst, gap);
  }
  CHECK(worst >= -1e-10);
  CHECK_THROWS_AS(convex_rescale(h, 0.5), DomainError);
  CHECK_THROWS_AS(convex_rescale(interval(-1, 1), 2.0), UnsupportedError);
}

TEST_CASE("feasible_mu examples") {
  const double a[] = {0.6, 0.6};
  const FeasibleMu fa = feasible_mu(a);
  CHECK(fa.mu == doctest::Approx(0.6));
  CHECK(fa.lambdas_tilde == std::vector<double>{1.0});

  const double b[] = {1.5, 0.5, 0.5};
  const FeasibleMu fb = feasible_mu(b);
  CHECK(fb.mu == doctest::Approx(1.0));
  CHECK(fb.lambdas_tilde[0] == doctest::Approx(0.5));
  CHECK(fb.lambdas_tilde[1] == doctest::Approx(0.5));

  const double c[] = {2.0, 0.6, 0.5};
  const FeasibleMu fc = feasible_mu(c);
  CHECK(fc.mu == doctest::Approx(1.1));
  CHECK(fc.lambda - fc.mu <= 1.0);
  CHECK(fc.lambdas_tilde[0] + fc.lambdas_tilde[1] == doctest::Approx(1.0));

  const double unsorted[] = {0.5, 0.6}, outside[] = {2.0, 0.5};
  CHECK_THROWS_AS(feasible_mu(unsorted), DomainError);
  CHECK_THROWS_AS(feasible_mu(outside), DomainError);
}

TEST_CASE("sup_convolution on the affine and common-concave families") {
  const FunctionSpec fs[] = {ramp(1.3, 0.4), ramp(1.3, -0.2), ramp(1.3, 0.7)};
  const double lt[] = {0.5, 0.5};
  const SupConvolution out = sup_convolution(std::span(fs).subspan(1), lt);
  for (double x : {-3.0, -0.4, 0.0, 1.7, 3.5}) {
    CHECK(std::fabs(quantile_at(out.h_tilde, x) - (1.3 * x + 0.25)) <= out.resolution_bound);
  }
  CHECK(out.resolution_bound <= 1e-9);

  const FunctionSpec common[] = {kinked(), kinked()};
  const SupConvolution c = sup_convolution(common, lt);
  for (double x : {-2.0, -0.3, 0.1, 0.5, 2.2}) {
    CHECK(std::fabs(quantile_at(c.h_tilde, x) - quantile_at(kinked(), x)) <= c.resolution_bound);
  }

  // A finer grid moves the node values by no more than the reported bound.
  SupConvolutionGrid fine;
  fine.x_points = 2 * fine.x_points - 1;
  fine.z_points = 2 * fine.z_points - 1;
  const SupConvolution c2 = sup_convolution(common, lt, fine);
  for (int k = 0; k < 161; ++k) {
    const double x = -8.0 + 0.1 * k;
    CHECK(std::fabs(quantile_at(c.h_tilde, x) - quantile_at(c2.h_tilde, x)) <= c.resolution_bound);
  }

  const FunctionSpec three[] = {kinked(), kinked(), kinked()};
  const double lt3[] = {0.4, 0.3, 0.3};
  SupConvolutionGrid coarse;
  coarse.x_points = 21;
  coarse.z_points = 41;
  const SupConvolution c3 = sup_convolution(three, lt3, coarse);
  CHECK(std::fabs(quantile_at(c3.h_tilde, 0.4) - quantile_at(kinked(), 0.4)) <= c3.resolution_bound);

  CHECK_THROWS_AS(sup_convolution(std::span<const FunctionSpec>{}, std::span<const double>{}), DomainError);
  const FunctionSpec planar[] = {FunctionSpec::linear_gaussian({1, 0}, 0), FunctionSpec::linear_gaussian({1, 0}, 0)};
  CHECK_THROWS_AS(sup_convolution(planar, lt), UnsupportedError);
}

TEST_CASE("two-stage reduction of an m = 3 equality instance") {
  const auto inst = std::get<MInstance>(make_equality_instance(EqualityCase::h1, linear_params({0.8, 0.5, 0.4}, {0.2, -0.3, 0.6})));
  CHECK(std::fabs(deficit_m(inst).value()) <= 1e-9);
  const FeasibleMu split = feasible_mu(inst.lambdas());
  const SupConvolution ht = sup_convolution(std::span(inst.fs()).subspan(1), split.lambdas_tilde);
  const BorellInstance outer(split.lambda, split.mu, inst.fs()[0], ht.h_tilde, inst.h());
  const MInstance inner(split.lambdas_tilde, {inst.fs()[1], inst.fs()[2]}, ht.h_tilde);
  CHECK(std::fabs(deficit(outer).value()) <= 1e-7);
  CHECK(std::fabs(deficit_m(inner).value()) <= 1e-7);
}

TEST_CASE("convex-regime concave composites are strict") {
  for (int k = 0; k < 10; ++k) {
    const double l = 1.6 + 0.1 * k, m = 0.3 + 0.02 * k, s = l + m;
    const ConcavePWL v({{{1.0 + 0.1 * k}, 0.5}, {{-2.0}, 1.0 - 0.05 * k}});
    std::vector<AffinePiece> scaled = v.pieces();
    for (auto& p : scaled) p.offset *= s;
    InstanceFlags flags;
    flags.convex_regime = true;
    const BorellInstance inst(l, m, FunctionSpec::concave_composite(v), FunctionSpec::concave_composite(v),
                              FunctionSpec::concave_composite(ConcavePWL(scaled)), flags);
    CHECK(inst.regime() == Regime::convex);
    CHECK(deficit(inst).value() > 0.0);
    CHECK(classify_equality(inst).case_label == EqualityCase::strict);
  }
}
