#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "pmifact/cooc_counter.hpp"

using namespace pmifact;

namespace {

const std::string& zipf_text() {
  static const std::string text = [] {
    std::mt19937_64 rng(1);
    std::vector<double> w(20000);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = 1.0 / double(k + 1);
    std::discrete_distribution<int> word(w.begin(), w.end());
    std::string t;
    for (int i = 0; i < 200'000; ++i) {
      t += "w" + std::to_string(word(rng));
      t += i % 500 == 499 ? "\n\n" : " ";
    }
    return t;
  }();
  return text;
}

void BM_CountWindow(benchmark::State& state) {
  const auto& text = zipf_text();
  const auto vocab = build_vocabulary(tokenize(text), 10000, 1);
  const WindowConfig cfg{static_cast<std::uint32_t>(state.range(0)), Weighting::dynamic, {}};
  for (auto _ : state) {
    auto stats = count_cooccurrences(text, {}, vocab, cfg, 0.75);
    benchmark::DoNotOptimize(stats.n_total());
  }
  state.SetItemsProcessed(state.iterations() * 200'000);
}
BENCHMARK(BM_CountWindow)->Arg(2)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Tokenize(benchmark::State& state) {
  const auto& text = zipf_text();
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text).size());
  state.SetBytesProcessed(state.iterations() * std::int64_t(text.size()));
}
BENCHMARK(BM_Tokenize)->Unit(benchmark::kMillisecond);

}  // namespace
