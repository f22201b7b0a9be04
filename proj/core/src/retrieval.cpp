#include "figshot/retrieval.hpp"

#include <fmt/core.h>

#include "figshot/error.hpp"
#include "figshot/jsonl.hpp"

namespace figshot {

std::string_view to_string(RetrievalSpace space) {
  switch (space) {
    case RetrievalSpace::Question: return "question";
    case RetrievalSpace::FusedQuestionImage: return "fused_question_image";
    case RetrievalSpace::Joint: return "joint";
  }
  return "unknown";
}

std::string_view to_string(FilterMode mode) {
  return mode == FilterMode::Filtered ? "filtered" : "unfiltered";
}

void validate(const RetrievalSpec& spec) {
  if (spec.shots < 0 || spec.shots > 2) {
    throw Error(fmt::format("shots must be 0, 1 or 2, got {}", spec.shots));
  }
}

std::vector<std::string> candidate_pool(const Corpus& corpus, const Instance& query,
                                        FilterMode mode) {
  std::vector<const Instance*> train;
  bool any_train = false;
  for (const auto& instance : corpus.instances()) {
    if (instance.split != Split::Train) continue;
    any_train = true;
    if (instance.image_id != query.image_id) train.push_back(&instance);
  }
  if (!any_train) throw Error("candidate_pool: corpus has no train-split instances");

  const auto collect = [&](auto&& keep) {
    std::vector<std::string> ids;
    for (const auto* instance : train) {
      if (keep(*instance)) ids.push_back(instance->instance_id);
    }
    return ids;
  };
  const auto everything = [](const Instance&) { return true; };

  if (mode == FilterMode::Filtered) {
    auto same_type_and_count = collect([&](const Instance& c) {
      return c.figure_type == query.figure_type && c.figs_numb == query.figs_numb;
    });
    if (!same_type_and_count.empty()) return same_type_and_count;
    auto same_type = collect([&](const Instance& c) { return c.figure_type == query.figure_type; });
    if (!same_type.empty()) return same_type;
  }
  return collect(everything);
}

Vector retrieval_vector(const EmbeddingStore& store, RetrievalSpace space,
                        std::string_view instance_id) {
  switch (space) {
    case RetrievalSpace::Question: return store.get(EmbeddingSpace::Question, instance_id);
    case RetrievalSpace::Joint: return store.get(EmbeddingSpace::Joint, instance_id);
    case RetrievalSpace::FusedQuestionImage:
      return fuse(store.get(EmbeddingSpace::Question, instance_id),
                  store.get(EmbeddingSpace::Image, instance_id));
  }
  throw Error("unknown retrieval space");
}

std::vector<RankedCandidate> rank_pool(const Corpus& corpus, const EmbeddingStore& store,
                                       const Instance& query, RetrievalSpace space,
                                       std::span<const std::string> pool) {
  const Vector query_vec = retrieval_vector(store, space, query.instance_id);
  std::vector<Vector> vectors;
  vectors.reserve(pool.size());
  for (const auto& id : pool) vectors.push_back(retrieval_vector(store, space, id));

  std::vector<RankInput> inputs;
  inputs.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto order = corpus.index_of(pool[i]);
    if (!order) throw Error(fmt::format("candidate '{}' is not in the corpus", pool[i]));
    inputs.push_back({pool[i], *order, vectors[i]});
  }
  return rank_candidates(query_vec, inputs);
}

FewShotSelection select(const Corpus& corpus, const EmbeddingStore& store, const Instance& query,
                        const RetrievalSpec& spec) {
  validate(spec);
  FewShotSelection out;
  if (spec.shots == 0) return out;

  const auto pool = candidate_pool(corpus, query, spec.filter);
  out.pool_size = pool.size();
  if (pool.empty()) {
    throw Error(fmt::format("no few-shot candidates for '{}'", query.instance_id));
  }
  const auto ranking = rank_pool(corpus, store, query, spec.space, pool);

  if (spec.shots == 1) {
    out.example_ids.push_back(ranking.front().instance_id);
    out.similarities.push_back(ranking.front().similarity);
    return out;
  }

  const RankedCandidate* answerable = nullptr;
  const RankedCandidate* unanswerable = nullptr;
  for (const auto& candidate : ranking) {
    const bool is_answerable = corpus.get(candidate.instance_id).answerable();
    if (is_answerable && !answerable) answerable = &candidate;
    if (!is_answerable && !unanswerable) unanswerable = &candidate;
    if (answerable && unanswerable) break;
  }
  if (!unanswerable) {
    throw Error(fmt::format("2-shot retrieval for '{}': candidate pool has no unanswerable example",
                            query.instance_id));
  }
  if (!answerable) {
    throw Error(fmt::format("2-shot retrieval for '{}': candidate pool has no answerable example",
                            query.instance_id));
  }
  out.example_ids = {answerable->instance_id, unanswerable->instance_id};
  out.similarities = {answerable->similarity, unanswerable->similarity};
  return out;
}

std::map<QuestionType, double> match_rate(std::span<const SelectionRecord> selections,
                                          const Corpus& corpus) {
  if (selections.empty()) throw Error("match_rate: no selections");
  std::map<QuestionType, std::pair<std::size_t, std::size_t>> tally;  // (matches, total)
  for (const auto& record : selections) {
    if (record.selection.example_ids.size() != 1) {
      throw Error(fmt::format("match_rate expects one-shot selections; '{}' has {} examples",
                              record.query_id, record.selection.example_ids.size()));
    }
    const auto type = corpus.get(record.query_id).question_type;
    auto& [matches, total] = tally[type];
    ++total;
    if (corpus.get(record.selection.example_ids.front()).question_type == type) ++matches;
  }
  std::map<QuestionType, double> out;
  for (const auto& [type, counts] : tally) {
    out[type] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return out;
}

nlohmann::json to_json(const RetrievalSpec& spec) {
  return {{"shots", spec.shots},
          {"space", std::string(to_string(spec.space))},
          {"filter_mode", std::string(to_string(spec.filter))}};
}

nlohmann::json to_json(const SelectionRecord& record, const RetrievalSpec& spec) {
  return {{"query_id", record.query_id},
          {"example_ids", record.selection.example_ids},
          {"similarities", record.selection.similarities},
          {"pool_size", record.selection.pool_size},
          {"spec", to_json(spec)}};
}

void export_selections(const std::filesystem::path& path,
                       std::span<const SelectionRecord> records, const RetrievalSpec& spec) {
  std::vector<nlohmann::json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r, spec));
  jsonl::write_all(path, lines);
}

}  // namespace figshot
