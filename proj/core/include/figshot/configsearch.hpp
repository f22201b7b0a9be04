#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "figshot/corpus.hpp"
#include "figshot/ensemble.hpp"
#include "figshot/score_matrix.hpp"

namespace figshot {

struct GroupingOptions {
  /// Figure types whose share of figures is strictly below this are merged.
  double others_threshold = 0.02;
  /// Figure type split into one group per question type. Falls back to the
  /// most frequent type when absent from the corpus.
  std::string split_type = "line chart";
  std::string others_name = "others";
};

/// Partition of instances into evaluation groups.
struct GroupingPlan {
  std::map<std::string, std::vector<std::string>> groups;  // name -> ids in corpus order
  double others_threshold = 0.02;
  std::string split_type;  // the type actually split
  std::string others_name = "others";
  std::set<std::string> homogeneous_types;
  std::set<std::string> merged_types;
};

/// "<split type>/<question type>"
std::string split_group_name(const std::string& split_type, QuestionType type);

/// Shares are computed over distinct figures (image ids).
GroupingPlan build_groups(const Corpus& corpus, const GroupingOptions& options = {});

/// SplitMix64 step; used to derive per-repeat and per-group seeds.
std::uint64_t mix_seed(std::uint64_t value);

/// Seeded uniform shuffle of `group` cut into k contiguous near-equal folds
/// (a single fold when the group has fewer than k instances). Entries are
/// matrix row indices.
std::vector<std::vector<std::size_t>> make_folds(const ScoreMatrix& matrix,
                                                 std::span<const std::string> group,
                                                 std::size_t k, std::uint64_t seed);

struct FoldScores {
  std::vector<std::vector<std::size_t>> folds;
  std::vector<std::vector<double>> means;  // [fold][config], mean F1 over fold rows
};

FoldScores fold_scores(const ScoreMatrix& matrix, std::span<const std::string> group,
                       std::size_t k, std::uint64_t seed);

struct SelectOptions {
  std::size_t folds = 5;
  std::size_t min_repeats = 10;
  /// Stop once the winner has held for this many consecutive repeats.
  std::size_t stable_repeats = 3;
  std::size_t max_repeats = 50;
  std::uint64_t seed = 0;
};

struct ConfigSelection {
  std::string winner;
  /// Mean over all folds and repeats of (config fold mean - best fold mean).
  std::map<std::string, double> scores;
  std::size_t repeats = 0;
  std::vector<std::uint64_t> seeds;         // one per repeat
  std::vector<std::string> winner_history;  // winner after each repeat
};

/// Ties on the score go to the lexicographically smallest configuration id.
ConfigSelection select_best(const ScoreMatrix& matrix, std::span<const std::string> group,
                            const SelectOptions& options = {});

struct TypeTableSearch {
  TypeTablePlan plan;
  GroupingPlan grouping;
  std::map<std::string, ConfigSelection> selections;  // per group

  nlohmann::json diagnostics() const;
};

/// Groups the corpus, selects a configuration per group and lays the winners
/// out as a type table. Every corpus instance must have a matrix row.
TypeTableSearch build_type_table(const ScoreMatrix& matrix, const Corpus& corpus,
                                 const SelectOptions& select_options = {},
                                 const GroupingOptions& grouping_options = {});

}  // namespace figshot
