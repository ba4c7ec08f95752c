#include <benchmark/benchmark.h>

#include "flusig/classify.hpp"
#include "flusig/rng.hpp"

namespace {

flusig::Dataset synthetic(std::size_t n, std::uint32_t dim, std::uint64_t seed) {
  flusig::Rng rng(seed);
  flusig::Dataset d;
  d.dimension = dim;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    flusig::FeatureVector v;
    v.dimension = dim;
    if (pos) v.active.push_back(0);
    for (std::uint32_t f = 1; f < dim; ++f) {
      if (rng.below(8) == 0) v.active.push_back(f);
    }
    d.vectors.push_back(std::move(v));
    d.labels.push_back(pos ? flusig::Polarity::positive : flusig::Polarity::negative);
  }
  return d;
}

void BM_train_nb(benchmark::State& state) {
  const auto d = synthetic(static_cast<std::size_t>(state.range(0)), 512, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(flusig::train_nb(d));
  }
}
BENCHMARK(BM_train_nb)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_predict_nb(benchmark::State& state) {
  const auto d = synthetic(512, 512, 5);
  const auto model = flusig::train_nb(d);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(flusig::predict_nb(model, d.vectors[i % d.vectors.size()]));
    ++i;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_predict_nb);

void BM_train_svm_smo(benchmark::State& state) {
  const auto d = synthetic(static_cast<std::size_t>(state.range(0)), 256, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(flusig::train_svm(d, 10.0, 0.1, 13));
  }
}
BENCHMARK(BM_train_svm_smo)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
