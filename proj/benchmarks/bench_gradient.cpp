#include <benchmark/benchmark.h>

#include <random>

#include "pmifact/trainer.hpp"

using namespace pmifact;

namespace {

CoocStats random_stats(std::uint32_t n, double density) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution keep(density);
  std::exponential_distribution<double> value(0.2);
  std::vector<CoocTriple> t;
  for (TokenId i = 0; i < n; ++i)
    for (TokenId j = 0; j < n; ++j)
      if (i == j || keep(rng)) t.push_back({i, j, value(rng) + 0.01});
  return CoocStats(n, std::move(t), {});
}

// One shard of side range(0), d = 100.
void BM_ShardGradient(benchmark::State& state, LossKind kind) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const auto stats = random_stats(n, 0.05);
  LossSpec spec;
  spec.kind = kind;
  const LossKernel kernel(stats, spec);
  const auto emb = init_embeddings(n, n, 100, 1, spec.has_biases());
  const Block block{{0, n}, {0, n}};
  for (auto _ : state) {
    auto g = shard_gradient(stats, emb, block, kernel);
    benchmark::DoNotOptimize(g.loss);
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(n) * n);
}
BENCHMARK_CAPTURE(BM_ShardGradient, mle, LossKind::hilbert_mle)
    ->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ShardGradient, sgns, LossKind::mf_sgns)
    ->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ShardGradient, glove, LossKind::mf_glove)
    ->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace
