#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "flusig/rng.hpp"
#include "flusig/tokenize.hpp"

namespace {

std::vector<std::string> sample_texts(std::size_t n) {
  const char* words[] = {"feeling", "rough",    "today",  "flu",     "season", "again",
                         "got",     "my",       "shot",   "at",      "the",    "clinic",
                         "staying", "home",     "from",   "work",    "#H1N1",  "@nurse",
                         "http://example.org/a", "washed", "hands", "twice"};
  flusig::Rng rng(7);
  std::vector<std::string> texts;
  texts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string t;
    const std::size_t len = 8 + rng.below(12);
    for (std::size_t w = 0; w < len; ++w) {
      if (!t.empty()) t += ' ';
      t += words[rng.below(22)];
    }
    texts.push_back(std::move(t));
  }
  return texts;
}

void BM_tokenize(benchmark::State& state) {
  const auto texts = sample_texts(1000);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(flusig::tokenize(texts[i % texts.size()]));
    ++i;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_tokenize);

}  // namespace

BENCHMARK_MAIN();
