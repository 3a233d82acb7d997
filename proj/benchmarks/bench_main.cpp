#include "blind_lmmse/convolution.hpp"
#include "blind_lmmse/datagen.hpp"
#include "blind_lmmse/estimators.hpp"
#include "blind_lmmse/moments.hpp"

#include <benchmark/benchmark.h>

using namespace blmmse;

namespace {

ProblemMoments make_problem(Eigen::Index n) {
  const ShiftedKernelEnsemble ens{n, 9, 0.5, 0.4, 0.0};
  return induced_moments(to_gaussian(SinusoidPrior{n, 2.0}), ens, 0.5);
}

void BM_KernelStats(benchmark::State& state) {
  const ShiftedKernelEnsemble ens{state.range(0), 9, 0.5, 0.4, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(kernel_stats(ens));
}
BENCHMARK(BM_KernelStats)->Arg(32)->Arg(128);

void BM_InteractionCirculant(benchmark::State& state) {
  const ProblemMoments pm = make_problem(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(interaction_matrix(pm));
}
BENCHMARK(BM_InteractionCirculant)->Arg(32)->Arg(128);

// Block-by-block double sum; the baseline the structured path avoids.
void BM_InteractionGeneral(benchmark::State& state) {
  const ProblemMoments pm = make_problem(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(interaction_matrix_general(pm));
}
BENCHMARK(BM_InteractionGeneral)->Arg(16)->Arg(32);

void BM_BlindSignalGain(benchmark::State& state) {
  const ProblemMoments pm = make_problem(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lmmse_blind_signal(pm, 0.1));
}
BENCHMARK(BM_BlindSignalGain)->Arg(32)->Arg(128);

void BM_EmpiricalLmmse(benchmark::State& state) {
  const Eigen::Index n = 64;
  const ShiftedKernelEnsemble ens{n, 9, 0.5, 0.4, 0.0};
  const SampleSet train = generate_samples(to_gaussian(SinusoidPrior{n, 2.0}), ens, 0.5, state.range(0), 7);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_lmmse(train, 0.1));
}
BENCHMARK(BM_EmpiricalLmmse)->Arg(500)->Arg(4000);

void BM_GenerateSamples(benchmark::State& state) {
  const Eigen::Index n = 128;
  const ShiftedKernelEnsemble ens{n, 9, 0.5, 0.4, 0.0};
  const GaussianPrior prior = to_gaussian(SinusoidPrior{n, 2.0});
  for (auto _ : state) benchmark::DoNotOptimize(generate_samples(prior, ens, 0.5, state.range(0), 11));
}
BENCHMARK(BM_GenerateSamples)->Arg(1000);

}  // namespace
BENCHMARK_MAIN();
