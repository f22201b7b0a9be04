#include "figshot/ensemble.hpp"

#include <set>

#include <fmt/core.h>
#include <fmt/format.h>

#include "figshot/error.hpp"
#include "figshot/jsonl.hpp"
#include "figshot/resources.hpp"

namespace figshot {

namespace {

std::string_view family_of(QuestionType type) {
  switch (type) {
    case QuestionType::BinaryVisual:
    case QuestionType::BinaryNonvisual: return "binary";
    case QuestionType::Mc4Visual:
    case QuestionType::Mc4Nonvisual: return "mc4";
    case QuestionType::InfiniteVisual:
    case QuestionType::InfiniteNonvisual: return "infinite";
    case QuestionType::Unanswerable: return "unanswerable";
  }
  return "";
}

nlohmann::json routing_json(const QuestionRouting& routing) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto type : kAllQuestionTypes) out[std::string(to_string(type))] = routing.at(type);
  return out;
}

void check_config_id(const std::string& id) { RunConfig::parse(id); }

}  // namespace

QuestionRouting parse_question_routing(const nlohmann::json& routing) {
  if (!routing.is_object()) throw Error("question routing must be an object");
  std::map<std::string, std::string, std::less<>> entries;
  for (const auto& [key, value] : routing.items()) {
    if (!value.is_string()) throw Error(fmt::format("routing entry '{}' must be a string", key));
    const bool known = key == "default" || key == "binary" || key == "mc4" || key == "infinite" ||
                       [&] {
                         try {
                           parse_question_type(key);
                           return true;
                         } catch (const Error&) {
                           return false;
                         }
                       }();
    if (!known) {
      throw Error(fmt::format(
          "unknown routing key '{}' (use a question type, binary, mc4, infinite or default)", key));
    }
    check_config_id(value.get<std::string>());
    entries.emplace(key, value.get<std::string>());
  }

  QuestionRouting out;
  for (const auto type : kAllQuestionTypes) {
    for (const auto key : {to_string(type), family_of(type), std::string_view("default")}) {
      if (const auto it = entries.find(key); it != entries.end()) {
        out[type] = it->second;
        break;
      }
    }
    if (!out.contains(type)) {
      throw Error(fmt::format("routing has no entry for question type {}", to_string(type)));
    }
  }
  return out;
}

std::string TypeTablePlan::group_of(std::string_view figure_type) const {
  const auto key = normalize_figure_type(figure_type);
  return table.contains(key) ? key : default_group;
}

EnsemblePlan plan_from_json(const nlohmann::json& plan) {
  try {
    const auto kind = plan.at("kind").get<std::string>();
    if (kind == "confidence") {
      ConfidencePlan out;
      out.stage1_config = plan.at("stage1_config").get<std::string>();
      check_config_id(out.stage1_config);
      out.threshold = plan.at("threshold").get<double>();
      if (!(out.threshold >= 0.0)) throw Error("confidence plan threshold must be >= 0");
      out.fallback = parse_question_routing(plan.at("fallback"));
      return out;
    }
    if (kind == "type_table") {
      TypeTablePlan out;
      out.default_group = normalize_figure_type(plan.value("default_group", "others"));
      for (const auto& [group, routing] : plan.at("table").items()) {
        try {
          out.table[normalize_figure_type(group)] = parse_question_routing(routing);
        } catch (const Error& e) {
          throw Error(fmt::format("table row '{}': {}", group, e.what()));
        }
      }
      if (!out.table.contains(out.default_group)) {
        throw Error(fmt::format("type table has no row for default group '{}'", out.default_group));
      }
      return out;
    }
    throw Error(fmt::format("unknown plan kind '{}' (allowed: confidence, type_table)", kind));
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("malformed plan: {}", e.what()));
  }
}

nlohmann::json to_json(const ConfidencePlan& plan) {
  return {{"kind", "confidence"},
          {"stage1_config", plan.stage1_config},
          {"threshold", plan.threshold},
          {"fallback", routing_json(plan.fallback)}};
}

nlohmann::json to_json(const TypeTablePlan& plan) {
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [group, routing] : plan.table) table[group] = routing_json(routing);
  return {{"kind", "type_table"}, {"default_group", plan.default_group}, {"table", std::move(table)}};
}

EnsemblePlan load_plan(const std::string& source) {
  std::string text;
  if (source == "builtin:confidence") {
    text = std::string(resources::confidence_plan);
  } else if (source == "builtin:type-table") {
    text = std::string(resources::type_table_plan);
  } else {
    text = jsonl::read_text(source);
  }
  try {
    return plan_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(fmt::format("{}: malformed plan JSON: {}", source, e.what()));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", source, e.what()));
  }
}

std::vector<std::string> referenced_configs(const EnsemblePlan& plan) {
  std::set<std::string> ids;
  if (const auto* c = std::get_if<ConfidencePlan>(&plan)) {
    ids.insert(c->stage1_config);
    for (const auto& entry : c->fallback) ids.insert(entry.second);
  } else {
    for (const auto& row : std::get<TypeTablePlan>(plan).table) {
      for (const auto& entry : row.second) ids.insert(entry.second);
    }
  }
  return {ids.begin(), ids.end()};
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Stage1: return "stage1";
    case Stage::Fallback: return "fallback";
    case Stage::Table: return "table";
  }
  return "unknown";
}

std::map<std::string, std::size_t> EnsembleOutput::counts_by_config() const {
  std::map<std::string, std::size_t> out;
  for (const auto& a : answers) ++out[a.prediction.config_id];
  return out;
}

std::map<std::string, std::size_t> EnsembleOutput::counts_by_stage() const {
  std::map<std::string, std::size_t> out;
  for (const auto& a : answers) ++out[std::string(to_string(a.stage))];
  return out;
}

std::vector<Prediction> EnsembleOutput::predictions() const {
  std::vector<Prediction> out;
  out.reserve(answers.size());
  for (const auto& a : answers) out.push_back(a.prediction);
  return out;
}

EnsembleOutput apply_confidence_plan(const ConfidencePlan& plan, const PredictionSet& caches,
                                     const Corpus& corpus,
                                     std::span<const std::string> instance_ids) {
  EnsembleOutput out;
  out.answers.reserve(instance_ids.size());
  for (const auto& id : instance_ids) {
    const auto& instance = corpus.get(id);
    const auto& first = caches.get(id, plan.stage1_config);
    if (first.confidence >= plan.threshold) {
      out.answers.push_back({first, Stage::Stage1});
    } else {
      out.answers.push_back(
          {caches.get(id, plan.fallback.at(instance.question_type)), Stage::Fallback});
    }
  }
  return out;
}

EnsembleOutput apply_type_table(const TypeTablePlan& plan, const PredictionSet& caches,
                                const Corpus& corpus, std::span<const std::string> instance_ids) {
  EnsembleOutput out;
  out.answers.reserve(instance_ids.size());
  for (const auto& id : instance_ids) {
    const auto& instance = corpus.get(id);
    const auto group = plan.group_of(instance.figure_type);
    const auto row = plan.table.find(group);
    if (row == plan.table.end()) {
      throw Error(fmt::format("type table has no row for group '{}' (instance '{}')", group, id));
    }
    const auto cell = row->second.find(instance.question_type);
    if (cell == row->second.end()) {
      throw Error(fmt::format("type table row '{}' has no entry for {}", group,
                              to_string(instance.question_type)));
    }
    out.answers.push_back({caches.get(id, cell->second), Stage::Table});
  }
  return out;
}

EnsembleOutput apply_plan(const EnsemblePlan& plan, const PredictionSet& caches,
                          const Corpus& corpus, std::span<const std::string> instance_ids) {
  return std::visit(
      [&](const auto& p) -> EnsembleOutput {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, ConfidencePlan>) {
          return apply_confidence_plan(p, caches, corpus, instance_ids);
        } else {
          return apply_type_table(p, caches, corpus, instance_ids);
        }
      },
      plan);
}

CoverageReport coverage_check(const EnsembleOutput& output,
                              std::span<const std::string> instance_ids) {
  CoverageReport report;
  const std::set<std::string> requested(instance_ids.begin(), instance_ids.end());
  std::map<std::string, std::size_t> answered;
  for (const auto& a : output.answers) ++answered[a.prediction.instance_id];
  for (const auto& id : instance_ids) {
    if (!answered.contains(id)) report.gaps.push_back(id);
  }
  for (const auto& [id, count] : answered) {
    if (count > 1) report.duplicates.push_back(id);
    if (!requested.contains(id)) report.unexpected.push_back(id);
  }
  return report;
}

nlohmann::json to_json(const CoverageReport& report) {
  return {{"ok", report.ok()},
          {"gaps", report.gaps},
          {"duplicates", report.duplicates},
          {"unexpected", report.unexpected}};
}

nlohmann::json provenance_json(const EnsembleOutput& output) {
  return {{"answers", output.answers.size()},
          {"by_config", output.counts_by_config()},
          {"by_stage", output.counts_by_stage()}};
}

void write_submission(const std::filesystem::path& path, const EnsembleOutput& output) {
  std::vector<nlohmann::json> lines;
  lines.reserve(output.answers.size());
  for (const auto& a : output.answers) {
    lines.push_back({{"instance_id", a.prediction.instance_id}, {"answer", a.prediction.answer_text}});
  }
  jsonl::write_all(path, lines);
}

}  // namespace figshot
