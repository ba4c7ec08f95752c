// Desk-scale target: a 10,000-message corpus against a 50-rule book well
// under five seconds.

#include <benchmark/benchmark.h>

#include <sstream>
#include <string>
#include <vector>

#include "flusig/rng.hpp"
#include "flusig/rulelang.hpp"
#include "flusig/tokenize.hpp"

namespace {

const char* kWords[] = {"flu",  "shot",   "mask", "doctor", "sick",  "week", "home",
                        "work", "hand",   "wash", "jab",    "fever", "the",  "a",
                        "i",    "my",     "got",  "have",   "been",  "off",  "school",
                        "away", "staying"};
constexpr std::size_t kNumWords = sizeof(kWords) / sizeof(kWords[0]);

flusig::RuleBook fifty_rule_book() {
  std::ostringstream text;
  flusig::Rng rng(3);
  for (int l = 0; l < 8; ++l) {
    text << "list L" << l << " =";
    for (int w = 0; w < 5; ++w) text << (w == 0 ? " " : ", ") << kWords[rng.below(kNumWords)];
    text << '\n';
  }
  for (int r = 0; r < 50; ++r) {
    text << "rule R" << r << " cat " << "AIPWS"[r % 5] << ": @L" << rng.below(8) << " _{0,"
         << 1 + rng.below(4) << "} " << kWords[rng.below(kNumWords)];
    if (r % 3 == 0) text << " unless @L" << rng.below(8) << " within 2 before";
    text << '\n';
  }
  return flusig::parse_rulebook(text.str());
}

std::vector<std::vector<std::string>> corpus_tokens(std::size_t n) {
  flusig::Rng rng(9);
  std::vector<std::vector<std::string>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> toks;
    const std::size_t len = 6 + rng.below(16);
    for (std::size_t w = 0; w < len; ++w) toks.emplace_back(kWords[rng.below(kNumWords)]);
    out.push_back(std::move(toks));
  }
  return out;
}

void BM_rule_features_10k_corpus(benchmark::State& state) {
  const flusig::RuleBook book = fifty_rule_book();
  const auto corpus = corpus_tokens(10000);
  for (auto _ : state) {
    std::size_t bits = 0;
    for (const auto& tokens : corpus) {
      for (std::uint8_t b : flusig::rule_features(book, tokens)) bits += b;
    }
    benchmark::DoNotOptimize(bits);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.size()));
}
BENCHMARK(BM_rule_features_10k_corpus)->Unit(benchmark::kMillisecond);

void BM_match_single_rule(benchmark::State& state) {
  const flusig::RuleBook book = fifty_rule_book();
  const auto corpus = corpus_tokens(256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        flusig::match_rule(book.rules[i % book.rules.size()], corpus[i % corpus.size()], book));
    ++i;
  }
}
BENCHMARK(BM_match_single_rule);

}  // namespace

BENCHMARK_MAIN();
