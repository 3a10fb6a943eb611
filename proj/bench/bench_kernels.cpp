// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "lalign/features.hpp"
#include "lalign/rng.hpp"
#include "lalign/selection.hpp"
#include "lalign/signal.hpp"

namespace {

using namespace lalign;

Matrix gaussian(CounterRng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

std::vector<Trial> trials(int n, Eigen::Index c, Eigen::Index t) {
  CounterRng rng(1);
  std::vector<Trial> out;
  for (int i = 0; i < n; ++i) out.push_back({gaussian(rng, c, t), std::nullopt});
  return out;
}

void BM_Covariances(benchmark::State& state, bool parallel) {
  const auto xs = trials(static_cast<int>(state.range(0)), 22, 500);
  for (auto _ : state) {
    auto covs = parallel ? trial_covariances(xs) : trial_covariances_serial(xs);
    benchmark::DoNotOptimize(covs);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PairwiseDistances(benchmark::State& state, bool parallel) {
  const auto covs = trial_covariances(trials(static_cast<int>(state.range(0)), 22, 500));
  for (auto _ : state) {
    auto d = parallel ? pairwise_distances(covs) : pairwise_distances_serial(covs);
    benchmark::DoNotOptimize(d);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * (state.range(0) - 1) / 2);
}

void BM_FilterCausal(benchmark::State& state, bool parallel) {
  CounterRng rng(2);
  ContinuousRecording rec;
  rec.sample_rate = 250;
  rec.data = gaussian(rng, 22, state.range(0));
  const Vector taps = design_fir_bandpass(50, 8, 30, 250);
  for (auto _ : state) {
    auto out = parallel ? filter_causal(rec, taps) : filter_causal_serial(rec, taps);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 22);
}

}  // namespace

BENCHMARK_CAPTURE(BM_Covariances, serial, false)->Arg(144)->Arg(576);
BENCHMARK_CAPTURE(BM_Covariances, omp, true)->Arg(144)->Arg(576);
BENCHMARK_CAPTURE(BM_PairwiseDistances, serial, false)->Arg(72)->Arg(144);
BENCHMARK_CAPTURE(BM_PairwiseDistances, omp, true)->Arg(72)->Arg(144);
BENCHMARK_CAPTURE(BM_FilterCausal, serial, false)->Arg(20000)->Arg(100000);
BENCHMARK_CAPTURE(BM_FilterCausal, omp, true)->Arg(20000)->Arg(100000);

BENCHMARK_MAIN();
