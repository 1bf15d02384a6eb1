#include <benchmark/benchmark.h>

#include "polopt/polarimeter.hpp"
#include "polopt/training.hpp"

using namespace polopt;

namespace {

MuellerMatrix sample_mueller() {
  Rng rng(1);
  return synthesize_material(MaterialCategory::resin, rng).mueller;
}

MeasurementPlan random_plan(Condition c, int k) {
  return initial_plan(c, Regime::Random, k, 7);
}

}  // namespace

static void BM_Intensity(benchmark::State& state) {
  const MuellerMatrix m = sample_mueller();
  const MeasurementPlan plan = random_plan(Condition::LP_QWP, 1);
  for (auto _ : state) benchmark::DoNotOptimize(intensity(m, plan.captures()[0], plan.condition()));
}
BENCHMARK(BM_Intensity);

static void BM_DesignMatrix(benchmark::State& state) {
  const MeasurementPlan plan = random_plan(Condition::LP_QWP, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_design_matrix(plan));
}
BENCHMARK(BM_DesignMatrix)->Arg(4)->Arg(16)->Arg(64);

static void BM_Estimate(benchmark::State& state) {
  const MeasurementPlan plan = random_plan(Condition::LP_QWP, static_cast<int>(state.range(0)));
  const std::vector<double> f = measure(sample_mueller(), plan);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_mueller(plan, f));
}
BENCHMARK(BM_Estimate)->Arg(16)->Arg(64);

static void BM_TrainStep(benchmark::State& state) {
  const Dataset dataset = generate_dataset({4, 4, 1});
  TrainConfig cfg;
  cfg.steps = 10;
  for (auto _ : state)
    benchmark::DoNotOptimize(train(dataset, Condition::LP_QWP, Regime::Optimized, static_cast<int>(state.range(0)), 1, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.steps);
}
BENCHMARK(BM_TrainStep)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
