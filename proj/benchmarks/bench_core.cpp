#include <benchmark/benchmark.h>

#include "ebl/diffusion.hpp"
#include "ebl/equality.hpp"
#include "ebl/gaussian.hpp"
#include "ebl/heat.hpp"

using namespace ebl;

namespace {

FunctionSpec ramp(double a, double b) { return FunctionSpec::linear_gaussian({a}, b); }
FunctionSpec kinked() { return FunctionSpec::concave_composite(ConcavePWL({{{1.0}, 0.5}, {{-2.0}, 1.0}})); }

void BM_Quantile(benchmark::State& state) {
  double p = 1e-300;
  for (auto _ : state) {
    benchmark::DoNotOptimize(std_normal_quantile(p));
    p = p < 0.4 ? p * 1.7 : 1e-300;
  }
}
BENCHMARK(BM_Quantile);

void BM_HeatClosedForm(benchmark::State& state) {
  const FunctionSpec f = FunctionSpec::intervals({{-1.0, 1.0}});
  double x[1] = {0.3};
  for (auto _ : state) benchmark::DoNotOptimize(u_value(f, 0.5, x));
}
BENCHMARK(BM_HeatClosedForm);

void BM_HeatConcaveComposite(benchmark::State& state) {
  const FunctionSpec f = kinked();
  double x[1] = {0.3};
  double g[1];
  for (auto _ : state) benchmark::DoNotOptimize(u_value_and_grad(f, 0.5, x, g));
}
BENCHMARK(BM_HeatConcaveComposite);

void BM_DriftRamp(benchmark::State& state) {
  const BorellInstance inst(0.8, 0.7, ramp(0.5, 0.2), ramp(0.4, -0.1), ramp(0.45, 0.3));
  const double x[1] = {0.2}, y[1] = {-0.4};
  for (auto _ : state) benchmark::DoNotOptimize(drift_b(inst, 0.5, x, y));
}
BENCHMARK(BM_DriftRamp);

void BM_FeynmanKac(benchmark::State& state) {
  const BorellInstance inst(0.8, 0.7, ramp(0.5, 0.2), ramp(0.4, -0.1), ramp(0.45, 0.3));
  SimConfig cfg;
  cfg.n_paths = static_cast<std::size_t>(state.range(0));
  cfg.t_end = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(feynman_kac_estimate(inst, 0.5, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FeynmanKac)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ClassifyCommonConcave(benchmark::State& state) {
  EqualityParams p;
  p.lambdas = {0.3, 0.7};
  p.v = ConcavePWL({{{1.0}, 0.5}, {{-2.0}, 1.0}});
  const AnyInstance inst = make_equality_instance(EqualityCase::common_concave, p);
  for (auto _ : state) benchmark::DoNotOptimize(classify_equality(inst));
}
BENCHMARK(BM_ClassifyCommonConcave)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
