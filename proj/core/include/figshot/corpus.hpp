#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace figshot {

enum class QuestionType {
  BinaryVisual,
  BinaryNonvisual,
  Mc4Visual,
  Mc4Nonvisual,
  InfiniteVisual,
  InfiniteNonvisual,
  Unanswerable,
};

inline constexpr std::array<QuestionType, 7> kAllQuestionTypes = {
    QuestionType::BinaryVisual,     QuestionType::BinaryNonvisual, QuestionType::Mc4Visual,
    QuestionType::Mc4Nonvisual,     QuestionType::InfiniteVisual,  QuestionType::InfiniteNonvisual,
    QuestionType::Unanswerable,
};

std::string_view to_string(QuestionType type);
/// Case-insensitive. Throws figshot::Error listing the allowed values.
QuestionType parse_question_type(std::string_view text);
bool is_multiple_choice(QuestionType type);

enum class Split { Train, Validation, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// Figure types accepted by default. Anything else is rejected at load unless a
/// custom vocabulary is supplied.
const std::vector<std::string>& default_figure_types();

/// Lowercase and trim a figure-type label.
std::string normalize_figure_type(std::string_view text);

struct AnswerOption {
  std::string key;
  std::string text;

  friend bool operator==(const AnswerOption&, const AnswerOption&) = default;
};

struct Instance {
  std::string instance_id;
  std::string image_id;
  std::string image_path;
  std::string question;
  QuestionType question_type = QuestionType::BinaryVisual;
  std::string figure_type;
  bool compound = false;
  int figs_numb = 1;
  std::string caption;
  std::vector<AnswerOption> answer_options;
  std::string gold_answer;
  Split split = Split::Train;

  bool answerable() const { return question_type != QuestionType::Unanswerable; }

  friend bool operator==(const Instance&, const Instance&) = default;
};

nlohmann::json to_json(const Instance& instance);

/// Checks the per-record invariants. Throws figshot::Error with a reason.
void validate(const Instance& instance);

struct LoadOptions {
  std::optional<std::set<Split>> splits;
  /// Replaces default_figure_types() when set.
  std::optional<std::vector<std::string>> figure_types;
};

/// Immutable after construction. Instance order is the order of the source
/// file and doubles as the tie-break order for retrieval.
class Corpus {
 public:
  Corpus() = default;
  /// Validates every instance and builds the indices.
  explicit Corpus(std::vector<Instance> instances);

  const std::vector<Instance>& instances() const { return instances_; }
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }

  const Instance& at(std::size_t index) const { return instances_.at(index); }
  const Instance& get(std::string_view instance_id) const;
  const Instance* find(std::string_view instance_id) const;
  std::optional<std::size_t> index_of(std::string_view instance_id) const;

  const std::map<std::string, std::vector<std::string>>& by_image() const { return by_image_; }
  const std::map<std::pair<std::string, QuestionType>, std::vector<std::string>>& by_type() const {
    return by_type_;
  }

  /// Instance ids in corpus order for the given splits.
  std::vector<std::string> ids(const std::set<Split>& splits) const;
  std::vector<std::string> ids() const;

  /// New corpus holding only the listed splits (order preserved).
  Corpus filtered(const std::set<Split>& splits) const;

 private:
  std::vector<Instance> instances_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<std::string>> by_image_;
  std::map<std::pair<std::string, QuestionType>, std::vector<std::string>> by_type_;
};

/// Training and validation merged, the pool used for development experiments.
inline const std::set<Split> kDevSplits = {Split::Train, Split::Validation};

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options = {});
Instance instance_from_json(const nlohmann::json& record,
                            const std::vector<std::string>& figure_types);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);

/// Fraction of instances per figure type. Throws on an empty corpus.
std::map<std::string, double> figure_type_shares(const Corpus& corpus);

}  // namespace figshot
