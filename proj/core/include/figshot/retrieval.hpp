#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "figshot/corpus.hpp"
#include "figshot/embeddings.hpp"

namespace figshot {

/// Which vectors drive example ranking.
enum class RetrievalSpace {
  Question,            // question-text embeddings
  FusedQuestionImage,  // fuse(question, image) per instance
  Joint,               // one vision-language vector per image-question pair
};

enum class FilterMode { Filtered, Unfiltered };

std::string_view to_string(RetrievalSpace space);
std::string_view to_string(FilterMode mode);

struct RetrievalSpec {
  int shots = 0;  // 0, 1 or 2
  RetrievalSpace space = RetrievalSpace::Question;
  FilterMode filter = FilterMode::Filtered;

  friend bool operator==(const RetrievalSpec&, const RetrievalSpec&) = default;
};

/// Throws if shots is outside {0, 1, 2}.
void validate(const RetrievalSpec& spec);

struct FewShotSelection {
  std::vector<std::string> example_ids;
  std::vector<double> similarities;
  std::size_t pool_size = 0;

  friend bool operator==(const FewShotSelection&, const FewShotSelection&) = default;
};

/// Few-shot candidates for `query`, in corpus order. Only train-split
/// instances are candidates and anything sharing the query's image is
/// excluded. Filtered mode keeps the same figure type and subfigure count,
/// relaxing to figure type alone and then to the whole pool when empty.
std::vector<std::string> candidate_pool(const Corpus& corpus, const Instance& query,
                                        FilterMode mode);

/// Ranking vector of `instance_id` in `space`; the fused space combines the
/// question and image spaces of `store`.
Vector retrieval_vector(const EmbeddingStore& store, RetrievalSpace space,
                        std::string_view instance_id);

std::vector<RankedCandidate> rank_pool(const Corpus& corpus, const EmbeddingStore& store,
                                       const Instance& query, RetrievalSpace space,
                                       std::span<const std::string> pool);

/// 1-shot: best-ranked candidate. 2-shot: best answerable then best
/// unanswerable candidate from the same ranking. 0-shot: empty.
FewShotSelection select(const Corpus& corpus, const EmbeddingStore& store, const Instance& query,
                        const RetrievalSpec& spec);

struct SelectionRecord {
  std::string query_id;
  FewShotSelection selection;
};

/// Per query question type, the fraction of 1-shot selections whose example
/// has the same question type.
std::map<QuestionType, double> match_rate(std::span<const SelectionRecord> selections,
                                          const Corpus& corpus);

nlohmann::json to_json(const RetrievalSpec& spec);
nlohmann::json to_json(const SelectionRecord& record, const RetrievalSpec& spec);
void export_selections(const std::filesystem::path& path,
                       std::span<const SelectionRecord> records, const RetrievalSpec& spec);

}  // namespace figshot
