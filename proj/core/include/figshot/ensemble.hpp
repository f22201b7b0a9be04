#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "figshot/corpus.hpp"
#include "figshot/prediction.hpp"
#include "figshot/run_cache.hpp"

namespace figshot {

/// Question type -> configuration id, total over all seven types.
using QuestionRouting = std::map<QuestionType, std::string>;

/// Expands a routing object into a total map. Accepted keys, most specific
/// first: a question type ("binary_visual"), a family ("binary", "mc4",
/// "infinite") covering its visual and non-visual variants, and "default".
QuestionRouting parse_question_routing(const nlohmann::json& routing);

/// Stage 1 keeps the stage-1 configuration's answer when its confidence is at
/// least `threshold`; everything else is answered by fallback[question_type].
struct ConfidencePlan {
  std::string stage1_config;
  double threshold = 0.9;
  QuestionRouting fallback;
};

/// (figure-type group, question type) -> configuration. Figure types without
/// a row use `default_group`.
struct TypeTablePlan {
  std::map<std::string, QuestionRouting> table;
  std::string default_group = "others";

  std::string group_of(std::string_view figure_type) const;
};

using EnsemblePlan = std::variant<ConfidencePlan, TypeTablePlan>;

EnsemblePlan plan_from_json(const nlohmann::json& plan);
nlohmann::json to_json(const ConfidencePlan& plan);
nlohmann::json to_json(const TypeTablePlan& plan);

/// Reads a plan file, or one of the compiled-in defaults when `source` is
/// "builtin:confidence" or "builtin:type-table".
EnsemblePlan load_plan(const std::string& source);

/// Configuration ids a plan may read from.
std::vector<std::string> referenced_configs(const EnsemblePlan& plan);

enum class Stage { Stage1, Fallback, Table };
std::string_view to_string(Stage stage);

struct EnsembleAnswer {
  Prediction prediction;  // the selected source prediction
  Stage stage = Stage::Table;
};

struct EnsembleOutput {
  std::vector<EnsembleAnswer> answers;  // in the order instances were given

  /// answers per source configuration and per stage
  std::map<std::string, std::size_t> counts_by_config() const;
  std::map<std::string, std::size_t> counts_by_stage() const;
  std::vector<Prediction> predictions() const;
};

EnsembleOutput apply_confidence_plan(const ConfidencePlan& plan, const PredictionSet& caches,
                                     const Corpus& corpus,
                                     std::span<const std::string> instance_ids);

EnsembleOutput apply_type_table(const TypeTablePlan& plan, const PredictionSet& caches,
                                const Corpus& corpus, std::span<const std::string> instance_ids);

EnsembleOutput apply_plan(const EnsemblePlan& plan, const PredictionSet& caches,
                          const Corpus& corpus, std::span<const std::string> instance_ids);

struct CoverageReport {
  std::vector<std::string> gaps;        // requested, not answered
  std::vector<std::string> duplicates;  // answered more than once
  std::vector<std::string> unexpected;  // answered, not requested

  bool ok() const { return gaps.empty() && duplicates.empty() && unexpected.empty(); }
};

CoverageReport coverage_check(const EnsembleOutput& output,
                              std::span<const std::string> instance_ids);

nlohmann::json to_json(const CoverageReport& report);
nlohmann::json provenance_json(const EnsembleOutput& output);

/// JSONL {"instance_id", "answer"} per answer.
void write_submission(const std::filesystem::path& path, const EnsembleOutput& output);

}  // namespace figshot
