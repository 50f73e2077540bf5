#include <benchmark/benchmark.h>

#include <vector>

#include "safe/expfam.hpp"
#include "safe/seqsim.hpp"
#include "safe/tables2x2.hpp"
#include "safe/ttest.hpp"

namespace {

void BM_SafeTTwoPoint(benchmark::State& state) {
  const auto prior = safe::SymmetricEffectPrior::two_point(0.5);
  const auto input = safe::TTestInput::from_statistic(3.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(safe::safe_t_log_s(input, prior));
}
BENCHMARK(BM_SafeTTwoPoint)->Arg(10)->Arg(100)->Arg(1000);

void BM_SafeTCauchy(benchmark::State& state) {
  const auto prior = safe::SymmetricEffectPrior::cauchy(0.7071067811865476);
  const auto input = safe::TTestInput::from_statistic(3.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(safe::safe_t_log_s(input, prior));
}
BENCHMARK(BM_SafeTCauchy)->Arg(10)->Arg(100)->Arg(1000);

void BM_SafeTThreshold(benchmark::State& state) {
  const auto prior = safe::SymmetricEffectPrior::two_point(0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(safe::safe_t_rejection_threshold(prior, 50, 0.05));
  }
}
BENCHMARK(BM_SafeTThreshold);

void BM_TwoSidedThresholdCn(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(safe::two_sided_threshold_cn(0.05, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_TwoSidedThresholdCn)->Arg(10)->Arg(1000000);

void BM_GrowTableBeam(benchmark::State& state) {
  const safe::TableDesign design(static_cast<unsigned>(state.range(0)),
                                 static_cast<unsigned>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(safe::solve_grow_test(design, safe::BoundarySpec::beam(0.5)));
  }
}
BENCHMARK(BM_GrowTableBeam)->Arg(4)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_GrowTableLemon(benchmark::State& state) {
  const safe::TableDesign design(10, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        safe::solve_grow_test(design, safe::BoundarySpec::lemon_log(design, 20.0)));
  }
}
BENCHMARK(BM_GrowTableLemon)->Unit(benchmark::kMillisecond);

void BM_AggressiveContinuation(benchmark::State& state) {
  const safe::ContinuationSetup setup{safe::gaussian_batches(10, 0.0),
                                      safe::gaussian_grow_batch_s(0.5),
                                      safe::ContinuationPolicy::aggressive(0.05, 20), 0.05};
  for (auto _ : state) benchmark::DoNotOptimize(safe::run_continuation(setup, 1000, 1));
}
BENCHMARK(BM_AggressiveContinuation)->Unit(benchmark::kMillisecond);

void BM_OptionalStoppingT(benchmark::State& state) {
  const auto prior = safe::SymmetricEffectPrior::two_point(0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(safe::run_optional_stopping_ttest(prior, 0.05, 54, 0.5, 1.0, 1000, 1));
  }
}
BENCHMARK(BM_OptionalStoppingT)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
