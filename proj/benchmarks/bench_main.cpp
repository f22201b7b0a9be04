#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "figshot/configsearch.hpp"
#include "figshot/corpus.hpp"
#include "figshot/embeddings.hpp"
#include "figshot/metrics.hpp"
#include "figshot/prompting.hpp"
#include "figshot/retrieval.hpp"
#include "figshot/score_matrix.hpp"

using namespace figshot;

namespace {

Vector random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal;
  Vector v(dim);
  for (auto& x : v) x = normal(rng);
  return normalize(v);
}

struct Data {
  Corpus corpus;
  EmbeddingStore store;
};

// `figures` figures with one answerable and one unanswerable question each.
Data make_data(std::size_t figures, std::size_t dim) {
  std::mt19937_64 rng(42);
  std::vector<Instance> instances;
  Data d;
  for (std::size_t f = 0; f < figures; ++f) {
    for (int q = 0; q < 2; ++q) {
      Instance inst;
      inst.instance_id = "f" + std::to_string(f) + "q" + std::to_string(q);
      inst.image_id = "f" + std::to_string(f);
      inst.question = "question";
      inst.question_type = q == 0 ? QuestionType::BinaryVisual : QuestionType::Unanswerable;
      inst.figure_type = f % 3 == 0 ? "bar chart" : "line chart";
      inst.caption = "caption";
      inst.gold_answer = q == 0 ? "Yes" : std::string(canonical_refusal());
      instances.push_back(inst);
      for (const auto space : {EmbeddingSpace::Question, EmbeddingSpace::Image, EmbeddingSpace::Joint}) {
        d.store.add({inst.instance_id, space, random_vector(rng, dim)});
      }
    }
  }
  d.corpus = Corpus(std::move(instances));
  return d;
}

void BM_RankPool(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)), 512);
  const auto& query = data.corpus.at(0);
  const auto pool = candidate_pool(data.corpus, query, FilterMode::Unfiltered);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank_pool(data.corpus, data.store, query, RetrievalSpace::Question, pool));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pool.size()));
}
BENCHMARK(BM_RankPool)->Arg(500)->Arg(5000);

void BM_SelectTwoShotFused(benchmark::State& state) {
  const auto data = make_data(2000, 512);
  const RetrievalSpec spec{2, RetrievalSpace::FusedQuestionImage, FilterMode::Filtered};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(select(data.corpus, data.store, data.corpus.at(i), spec));
    i = (i + 2) % data.corpus.size();
  }
}
BENCHMARK(BM_SelectTwoShotFused);

std::string words(std::mt19937_64& rng, std::size_t n) {
  static const char* vocab[] = {"the", "loss", "curve", "red", "blue", "epoch", "model", "accuracy"};
  std::uniform_int_distribution<int> pick(0, 7);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += std::string(vocab[pick(rng)]) + " ";
  return out;
}

void BM_Rouge1(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = words(rng, n), b = words(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(rouge1(a, b));
}
BENCHMARK(BM_Rouge1)->Arg(8)->Arg(64);

void BM_RougeL(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = words(rng, n), b = words(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(rougeL(a, b));
}
BENCHMARK(BM_RougeL)->Arg(8)->Arg(64)->Arg(256);

void BM_SelectBest(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit;
  const std::size_t rows = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> ids, configs;
  for (std::size_t r = 0; r < rows; ++r) ids.push_back("i" + std::to_string(r));
  for (const char* c : {"a:0s", "a:1s_q_f", "a:2s_q_f", "b:0s", "b:1s_joint_f", "b:2s_q_img_f"}) {
    configs.emplace_back(c);
  }
  std::vector<double> values(rows * configs.size());
  for (auto& v : values) v = unit(rng);
  const ScoreMatrix matrix(ids, configs, values);
  for (auto _ : state) benchmark::DoNotOptimize(select_best(matrix, ids));
}
BENCHMARK(BM_SelectBest)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
