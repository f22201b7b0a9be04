#include "figshot/report.hpp"

#include <algorithm>

#include <fmt/core.h>

#include "figshot/error.hpp"
#include "figshot/jsonl.hpp"

namespace figshot {

nlohmann::json to_json(const ScoreTriple& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

nlohmann::json to_json(const std::map<std::string, SliceScores>& slices) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [key, s] : slices) {
    nlohmann::json row = {{"count", s.count},
                          {"rouge1", to_json(s.rouge1)},
                          {"rougeL", to_json(s.rougeL)}};
    if (s.bertscore_f1) {
      row["bertscore_f1"] = *s.bertscore_f1;
      row["bertscore_count"] = s.bertscore_count;
    }
    out[key] = std::move(row);
  }
  return out;
}

nlohmann::json to_json(const CalibrationReport& report) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : report.bins) {
    bins.push_back({{"lower", b.lower},
                    {"upper", b.upper},
                    {"count", b.count},
                    {"fraction", b.fraction},
                    {"mean_rouge1_f1", b.mean_rouge1_f1 ? nlohmann::json(*b.mean_rouge1_f1)
                                                        : nlohmann::json(nullptr)}});
  }
  return {{"total", report.total},
          {"bins", std::move(bins)},
          {"below_range", {{"count", report.below_count}, {"fraction", report.below_fraction}}},
          {"above_range", {{"count", report.above_count}, {"fraction", report.above_fraction}}}};
}

std::string format_table(const std::map<std::string, SliceScores>& slices, std::string_view title) {
  std::size_t width = title.size();
  for (const auto& entry : slices) width = std::max(width, entry.first.size());
  const bool with_bert = std::any_of(slices.begin(), slices.end(),
                                     [](const auto& e) { return e.second.bertscore_f1.has_value(); });

  std::string out = fmt::format("{:<{}}  {:>6}  {:>6} {:>6} {:>6}  {:>6} {:>6} {:>6}", title, width,
                                "n", "R1-F1", "R1-P", "R1-R", "RL-F1", "RL-P", "RL-R");
  if (with_bert) out += fmt::format("  {:>6}", "BS-F1");
  out += "\n";
  for (const auto& [key, s] : slices) {
    out += fmt::format("{:<{}}  {:>6}  {:>6.1f} {:>6.1f} {:>6.1f}  {:>6.1f} {:>6.1f} {:>6.1f}", key,
                       width, s.count, 100 * s.rouge1.f1, 100 * s.rouge1.precision,
                       100 * s.rouge1.recall, 100 * s.rougeL.f1, 100 * s.rougeL.precision,
                       100 * s.rougeL.recall);
    if (with_bert) {
      out += s.bertscore_f1 ? fmt::format("  {:>6.1f}", 100 * *s.bertscore_f1)
                            : fmt::format("  {:>6}", "-");
    }
    out += "\n";
  }
  return out;
}

std::string format_table(const CalibrationReport& report) {
  std::string out = fmt::format("{:<11}  {:>6}  {:>8}  {:>10}\n", "bin", "n", "share", "R1-F1");
  for (const auto& b : report.bins) {
    out += fmt::format("{:<11}  {:>6}  {:>7.1f}%  {:>10}\n", fmt::format("{:.1f}_{:.1f}", b.lower, b.upper),
                       b.count, 100 * b.fraction,
                       b.mean_rouge1_f1 ? fmt::format("{:.1f}", 100 * *b.mean_rouge1_f1) : "-");
  }
  out += fmt::format("{:<11}  {:>6}  {:>7.1f}%\n", "below", report.below_count,
                     100 * report.below_fraction);
  if (report.above_count > 0) {
    out += fmt::format("{:<11}  {:>6}  {:>7.1f}%\n", "above", report.above_count,
                       100 * report.above_fraction);
  }
  return out;
}

BertScores load_bertscores(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(jsonl::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(fmt::format("{}: malformed BERTScore file: {}", path.string(), e.what()));
  }
  if (!j.is_object()) throw Error(fmt::format("{}: expected an object of id -> score", path.string()));
  BertScores out;
  for (const auto& [id, value] : j.items()) {
    if (!value.is_number()) throw Error(fmt::format("{}: score for '{}' is not a number", path.string(), id));
    out[id] = value.get<double>();
  }
  return out;
}

}  // namespace figshot
