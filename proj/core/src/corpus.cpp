#include "figshot/corpus.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/core.h>
#include <fmt/format.h>

#include "figshot/error.hpp"
#include "figshot/jsonl.hpp"
#include "figshot/prompting.hpp"

namespace figshot {

namespace {

constexpr std::array<std::pair<QuestionType, std::string_view>, 7> kQuestionTypeNames = {{
    {QuestionType::BinaryVisual, "binary_visual"},
    {QuestionType::BinaryNonvisual, "binary_nonvisual"},
    {QuestionType::Mc4Visual, "mc4_visual"},
    {QuestionType::Mc4Nonvisual, "mc4_nonvisual"},
    {QuestionType::InfiniteVisual, "infinite_visual"},
    {QuestionType::InfiniteNonvisual, "infinite_nonvisual"},
    {QuestionType::Unanswerable, "unanswerable"},
}};

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

template <typename T>
T required(const nlohmann::json& record, const char* field) {
  if (!record.contains(field)) throw Error(fmt::format("missing field '{}'", field));
  try {
    return record.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(fmt::format("field '{}' has the wrong type", field));
  }
}

template <typename T>
T optional_field(const nlohmann::json& record, const char* field, T fallback) {
  if (!record.contains(field) || record.at(field).is_null()) return fallback;
  try {
    return record.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(fmt::format("field '{}' has the wrong type", field));
  }
}

}  // namespace

std::string_view to_string(QuestionType type) {
  for (const auto& [value, name] : kQuestionTypeNames) {
    if (value == type) return name;
  }
  return "unknown";
}

QuestionType parse_question_type(std::string_view text) {
  const std::string key = lowercase(trim(text));
  for (const auto& [value, name] : kQuestionTypeNames) {
    if (key == name) return value;
  }
  std::vector<std::string_view> allowed;
  for (const auto& entry : kQuestionTypeNames) allowed.push_back(entry.second);
  throw Error(fmt::format("unknown question_type '{}' (allowed: {})", text,
                          fmt::join(allowed, ", ")));
}

bool is_multiple_choice(QuestionType type) {
  return type == QuestionType::Mc4Visual || type == QuestionType::Mc4Nonvisual;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view text) {
  const std::string key = lowercase(trim(text));
  if (key == "train") return Split::Train;
  if (key == "validation") return Split::Validation;
  if (key == "test") return Split::Test;
  throw Error(fmt::format("unknown split '{}' (allowed: train, validation, test)", text));
}

const std::vector<std::string>& default_figure_types() {
  static const std::vector<std::string> types = {
      "line chart",     "bar chart",         "scatter plot", "pie chart",
      "tree",           "graph",             "architecture diagram",
      "neural networks", "confusion matrix", "box plot",     "violin plot",
      "histogram",      "venn diagram",      "heat map",     "map",
      "illustrative diagram", "table",       "other",
  };
  return types;
}

std::string normalize_figure_type(std::string_view text) { return lowercase(trim(text)); }

nlohmann::json to_json(const Instance& instance) {
  nlohmann::json options = nlohmann::json::array();
  for (const auto& option : instance.answer_options) {
    options.push_back({{"key", option.key}, {"text", option.text}});
  }
  return {
      {"instance_id", instance.instance_id},
      {"image_id", instance.image_id},
      {"image_path", instance.image_path},
      {"question", instance.question},
      {"question_type", std::string(to_string(instance.question_type))},
      {"figure_type", instance.figure_type},
      {"compound", instance.compound},
      {"figs_numb", instance.figs_numb},
      {"caption", instance.caption},
      {"answer_options", std::move(options)},
      {"gold_answer", instance.gold_answer},
      {"split", std::string(to_string(instance.split))},
  };
}

void validate(const Instance& instance) {
  if (instance.instance_id.empty()) throw Error("instance_id is empty");
  if (instance.image_id.empty()) {
    throw Error(fmt::format("instance '{}': image_id is empty", instance.instance_id));
  }
  if (instance.figs_numb < 1) {
    throw Error(fmt::format("instance '{}': figs_numb must be >= 1, got {}", instance.instance_id,
                            instance.figs_numb));
  }
  if (!instance.compound && instance.figs_numb != 1) {
    throw Error(fmt::format("instance '{}': non-compound figure must have figs_numb = 1, got {}",
                            instance.instance_id, instance.figs_numb));
  }
  if (instance.answerable()) {
    const bool has_options = !instance.answer_options.empty();
    if (has_options != is_multiple_choice(instance.question_type)) {
      throw Error(fmt::format(
          "instance '{}': answer_options must be present exactly for mc4 question types "
          "(question_type={}, {} options)",
          instance.instance_id, to_string(instance.question_type),
          instance.answer_options.size()));
    }
  } else if (!instance.gold_answer.empty() && instance.gold_answer != canonical_refusal()) {
    throw Error(fmt::format("instance '{}': unanswerable gold_answer must be '{}'",
                            instance.instance_id, canonical_refusal()));
  }
}

Instance instance_from_json(const nlohmann::json& record,
                            const std::vector<std::string>& figure_types) {
  Instance out;
  out.instance_id = required<std::string>(record, "instance_id");
  out.image_id = required<std::string>(record, "image_id");
  out.image_path = optional_field<std::string>(record, "image_path", "");
  out.question = required<std::string>(record, "question");
  out.question_type = parse_question_type(required<std::string>(record, "question_type"));

  out.figure_type = normalize_figure_type(required<std::string>(record, "figure_type"));
  if (std::find(figure_types.begin(), figure_types.end(), out.figure_type) == figure_types.end()) {
    throw Error(fmt::format("unknown figure_type '{}' (allowed: {})", out.figure_type,
                            fmt::join(figure_types, ", ")));
  }

  out.compound = required<bool>(record, "compound");
  out.figs_numb = required<int>(record, "figs_numb");
  out.caption = required<std::string>(record, "caption");
  if (record.contains("answer_options") && !record.at("answer_options").is_null()) {
    const auto& options = record.at("answer_options");
    if (!options.is_array()) throw Error("field 'answer_options' must be an array");
    for (const auto& option : options) {
      out.answer_options.push_back(
          {required<std::string>(option, "key"), required<std::string>(option, "text")});
    }
  }
  out.gold_answer = optional_field<std::string>(record, "gold_answer", "");
  out.split = parse_split(required<std::string>(record, "split"));
  validate(out);
  return out;
}

Corpus::Corpus(std::vector<Instance> instances) : instances_(std::move(instances)) {
  index_.reserve(instances_.size());
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const auto& instance = instances_[i];
    validate(instance);
    if (!index_.emplace(instance.instance_id, i).second) {
      throw Error(fmt::format("duplicate instance_id '{}'", instance.instance_id));
    }
    by_image_[instance.image_id].push_back(instance.instance_id);
    by_type_[{instance.figure_type, instance.question_type}].push_back(instance.instance_id);
  }
}

const Instance& Corpus::get(std::string_view instance_id) const {
  if (const auto* instance = find(instance_id)) return *instance;
  throw Error(fmt::format("unknown instance '{}'", instance_id));
}

const Instance* Corpus::find(std::string_view instance_id) const {
  const auto it = index_.find(std::string(instance_id));
  return it == index_.end() ? nullptr : &instances_[it->second];
}

std::optional<std::size_t> Corpus::index_of(std::string_view instance_id) const {
  const auto it = index_.find(std::string(instance_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Corpus::ids(const std::set<Split>& splits) const {
  std::vector<std::string> out;
  for (const auto& instance : instances_) {
    if (splits.contains(instance.split)) out.push_back(instance.instance_id);
  }
  return out;
}

std::vector<std::string> Corpus::ids() const {
  std::vector<std::string> out;
  out.reserve(instances_.size());
  for (const auto& instance : instances_) out.push_back(instance.instance_id);
  return out;
}

Corpus Corpus::filtered(const std::set<Split>& splits) const {
  std::vector<Instance> kept;
  for (const auto& instance : instances_) {
    if (splits.contains(instance.split)) kept.push_back(instance);
  }
  return Corpus(std::move(kept));
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  std::vector<std::string> figure_types;
  for (const auto& type : options.figure_types.value_or(default_figure_types())) {
    figure_types.push_back(normalize_figure_type(type));
  }

  std::vector<Instance> instances;
  std::unordered_map<std::string, std::size_t> seen;
  jsonl::for_each(path, [&](const nlohmann::json& record, std::size_t line) {
    Instance instance;
    try {
      instance = instance_from_json(record, figure_types);
    } catch (const Error& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), line, e.what()));
    }
    if (const auto [it, inserted] = seen.emplace(instance.instance_id, line); !inserted) {
      throw Error(fmt::format("{}:{}: duplicate instance_id '{}' (first seen on line {})",
                              path.string(), line, instance.instance_id, it->second));
    }
    if (!options.splits || options.splits->contains(instance.split)) {
      instances.push_back(std::move(instance));
    }
  });
  return Corpus(std::move(instances));
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::vector<nlohmann::json> records;
  records.reserve(corpus.size());
  for (const auto& instance : corpus.instances()) records.push_back(to_json(instance));
  jsonl::write_all(path, records);
}

std::map<std::string, double> figure_type_shares(const Corpus& corpus) {
  if (corpus.empty()) throw Error("figure_type_shares: corpus is empty");
  std::map<std::string, std::size_t> counts;
  for (const auto& instance : corpus.instances()) ++counts[instance.figure_type];
  std::map<std::string, double> shares;
  const auto total = static_cast<double>(corpus.size());
  for (const auto& [type, count] : counts) shares[type] = static_cast<double>(count) / total;
  return shares;
}

}  // namespace figshot
