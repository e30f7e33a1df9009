// Serial reference kernels against the OpenMP versions.

#include <benchmark/benchmark.h>

#include "mvfbsde/estimator.hpp"
#include "mvfbsde/picard.hpp"
#include "mvfbsde/reference.hpp"
#include "mvfbsde/sampling.hpp"

using namespace mvfbsde;

namespace {

const LQParams kParams;
const TimeGrid kGrid(1.0, 16);
const BasisSpec kBasis{0.0, 2.0, 8};

PathMatrix increments(std::size_t paths) { return gen_increments({1, paths, false}, kGrid); }

void BM_Increments(benchmark::State& state) {
  const SampleConfig cfg{1, static_cast<std::size_t>(state.range(0)), false};
  for (auto _ : state) benchmark::DoNotOptimize(gen_increments(cfg, kGrid));
}

void BM_IncrementsReference(benchmark::State& state) {
  const SampleConfig cfg{1, static_cast<std::size_t>(state.range(0)), false};
  for (auto _ : state) benchmark::DoNotOptimize(reference::gen_increments(cfg, kGrid));
}

void BM_PicardStep(benchmark::State& state) {
  const PathMatrix dW = increments(static_cast<std::size_t>(state.range(0)));
  const auto init = constant_policy(kBasis, kGrid.steps(), kParams.c_g, 0.125);
  for (auto _ : state) {
    const PathMatrix X = rollout_states(PolicyYField{&init}, dW, kParams, kGrid);
    benchmark::DoNotOptimize(backward_pass(X, dW, kParams, kGrid, kBasis));
  }
}

void BM_PicardStepReference(benchmark::State& state) {
  const PathMatrix dW = increments(static_cast<std::size_t>(state.range(0)));
  const auto init = constant_policy(kBasis, kGrid.steps(), kParams.c_g, 0.125);
  for (auto _ : state) {
    const PathMatrix X = reference::rollout_states(init, dW, kParams, kGrid);
    benchmark::DoNotOptimize(reference::backward_pass(X, dW, kParams, kGrid, kBasis));
  }
}

void BM_Estimator(benchmark::State& state) {
  const auto pol = constant_policy(kBasis, kGrid.steps(), kParams.c_g, 0.125);
  const Ensemble e = policy_ensemble(pol, increments(static_cast<std::size_t>(state.range(0))),
                                     kParams, kGrid);
  const auto gen = GeneratorEval::lq(kParams);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_estimator(e, gen, kGrid));
}

void BM_EstimatorReference(benchmark::State& state) {
  const auto pol = constant_policy(kBasis, kGrid.steps(), kParams.c_g, 0.125);
  const Ensemble e = policy_ensemble(pol, increments(static_cast<std::size_t>(state.range(0))),
                                     kParams, kGrid);
  const auto gen = GeneratorEval::lq(kParams);
  for (auto _ : state) benchmark::DoNotOptimize(reference::evaluate_estimator(e, gen, kGrid));
}

}  // namespace

BENCHMARK(BM_Increments)->Arg(1 << 14)->Arg(1 << 17);
BENCHMARK(BM_IncrementsReference)->Arg(1 << 14)->Arg(1 << 17);
BENCHMARK(BM_PicardStep)->Arg(1 << 14)->Arg(1 << 17);
BENCHMARK(BM_PicardStepReference)->Arg(1 << 14)->Arg(1 << 17);
BENCHMARK(BM_Estimator)->Arg(1 << 14)->Arg(1 << 17);
BENCHMARK(BM_EstimatorReference)->Arg(1 << 14)->Arg(1 << 17);

BENCHMARK_MAIN();
