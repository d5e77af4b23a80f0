#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "vmmr/embed.hpp"
#include "vmmr/eval.hpp"
#include "vmmr/index.hpp"
#include "vmmr/kb.hpp"
#include "vmmr/prompt.hpp"

namespace {

using namespace vmmr;

EmbeddingVector random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = d(rng);
  return EmbeddingVector::normalized(std::move(v));
}

void BM_IndexSearch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(1);
  VectorIndex index(dim);
  for (std::size_t i = 0; i < n; ++i) index.add("r" + std::to_string(i), random_unit(rng, dim));
  const auto query = random_unit(rng, dim);
  for (auto _ : state) benchmark::DoNotOptimize(index.search(query, 5));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_IndexSearch)->Args({100, 64})->Args({1000, 384})->Args({10000, 768});

void BM_MockEmbed(benchmark::State& state) {
  EmbeddingBackendConfig config;
  config.kind = EmbeddingBackendKind::kMock;
  config.dim = static_cast<std::size_t>(state.range(0));
  MockEmbedder embedder(config);
  const std::string text =
      "Sharp LED headlights joined by a thin light bar, a closed grille panel with a central badge, "
      "a sculpted bumper with vertical air intakes and a long hood with two creases.";
  for (auto _ : state) benchmark::DoNotOptimize(embedder.embed(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_MockEmbed)->Arg(64)->Arg(768);

void BM_ComputeReport(benchmark::State& state) {
  const auto classes = static_cast<std::size_t>(state.range(0));
  std::vector<VehicleLabel> labels;
  for (std::size_t c = 0; c < classes; ++c) {
    labels.push_back(canonicalize_label("Make" + std::to_string(c), "Model"));
  }
  std::mt19937_64 rng(2);
  TruthMap truths;
  std::vector<Prediction> preds;
  for (std::size_t i = 0; i < classes * 10; ++i) {
    const auto id = "q" + std::to_string(i);
    truths.emplace(id, labels[i % classes]);
    Prediction p;
    p.query_id = id;
    if (rng() % 10 != 0) p.label = labels[rng() % classes];
    preds.push_back(std::move(p));
  }
  for (auto _ : state) benchmark::DoNotOptimize(compute_report(preds, truths, 5));
}
BENCHMARK(BM_ComputeReport)->Arg(10)->Arg(100);

void BM_BuildPrompt(benchmark::State& state) {
  KnowledgeBase kb;
  std::vector<RetrievalHit> hits;
  const auto k = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < 50; ++i) {
    const auto id = kb.ingest(canonicalize_label("Make" + std::to_string(i), "Model"),
                              Description("round headlights, wide grille, sloped hood, badge " +
                                          std::to_string(i)));
    if (i < k) hits.push_back({id, 1.0 - 0.01 * static_cast<double>(i), i + 1});
  }
  const Description query("thin light bar and a closed panel");
  const auto tmpl = default_reasoner_template();
  for (auto _ : state) benchmark::DoNotOptimize(build_prompt(query, hits, kb, tmpl));
}
BENCHMARK(BM_BuildPrompt)->Arg(1)->Arg(7);

}  // namespace

BENCHMARK_MAIN();
