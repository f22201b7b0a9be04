#include "figshot/metrics.hpp"

#include <algorithm>
#include <unordered_map>

#include <fmt/core.h>

#include "figshot/error.hpp"

namespace figshot {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

ScoreTriple score_counts(std::size_t overlap, std::size_t candidate_len,
                         std::size_t reference_len) {
  if (candidate_len == 0 && reference_len == 0) return {1.0, 1.0, 1.0};
  if (candidate_len == 0 || reference_len == 0) return {};
  return ScoreTriple::from_precision_recall(
      static_cast<double>(overlap) / static_cast<double>(candidate_len),
      static_cast<double>(overlap) / static_cast<double>(reference_len));
}

const Instance& scored_instance(const Corpus& corpus, const Prediction& p) {
  const auto* instance = corpus.find(p.instance_id);
  if (!instance) throw Error(fmt::format("prediction for unknown instance '{}'", p.instance_id));
  if (instance->gold_answer.empty()) {
    throw Error(fmt::format("instance '{}' has no gold answer to evaluate against", p.instance_id));
  }
  return *instance;
}

}  // namespace

ScoreTriple ScoreTriple::from_precision_recall(double precision, double recall) {
  const double sum = precision + recall;
  return {precision, recall, sum > 0.0 ? 2.0 * precision * recall / sum : 0.0};
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

ScoreTriple rouge1(std::string_view candidate, std::string_view reference) {
  const auto cand = tokenize(candidate);
  const auto ref = tokenize(reference);
  std::unordered_map<std::string_view, std::size_t> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  std::size_t overlap = 0;
  for (const auto& t : cand) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return score_counts(overlap, cand.size(), ref.size());
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> curr(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

ScoreTriple rougeL(std::string_view candidate, std::string_view reference) {
  const auto cand = tokenize(candidate);
  const auto ref = tokenize(reference);
  return score_counts(lcs_length(cand, ref), cand.size(), ref.size());
}

SliceBy parse_slice_by(std::string_view text) {
  if (text == "none") return SliceBy::None;
  if (text == "question_type") return SliceBy::QuestionType;
  if (text == "figure_type") return SliceBy::FigureType;
  if (text == "both") return SliceBy::Both;
  throw Error(fmt::format("unknown slice '{}' (allowed: none, question_type, figure_type, both)",
                          text));
}

std::map<std::string, SliceScores> aggregate(std::span<const Prediction> predictions,
                                             const Corpus& corpus, SliceBy slice_by,
                                             const BertScores* bertscores) {
  struct Sums {
    std::size_t count = 0;
    ScoreTriple r1, rl;
    double bert = 0.0;
    std::size_t bert_count = 0;
  };
  std::map<std::string, Sums> sums;
  for (const auto& p : predictions) {
    const auto& instance = scored_instance(corpus, p);
    std::string key;
    switch (slice_by) {
      case SliceBy::None: key = "all"; break;
      case SliceBy::QuestionType: key = std::string(to_string(instance.question_type)); break;
      case SliceBy::FigureType: key = instance.figure_type; break;
      case SliceBy::Both:
        key = instance.figure_type + "|" + std::string(to_string(instance.question_type));
        break;
    }
    auto& s = sums[key];
    const auto r1 = rouge1(p.answer_text, instance.gold_answer);
    const auto rl = rougeL(p.answer_text, instance.gold_answer);
    ++s.count;
    s.r1.precision += r1.precision;
    s.r1.recall += r1.recall;
    s.r1.f1 += r1.f1;
    s.rl.precision += rl.precision;
    s.rl.recall += rl.recall;
    s.rl.f1 += rl.f1;
    if (bertscores) {
      if (const auto it = bertscores->find(p.instance_id); it != bertscores->end()) {
        s.bert += it->second;
        ++s.bert_count;
      }
    }
  }

  std::map<std::string, SliceScores> out;
  for (const auto& [key, s] : sums) {
    const auto n = static_cast<double>(s.count);
    SliceScores scores;
    scores.count = s.count;
    scores.rouge1 = {s.r1.precision / n, s.r1.recall / n, s.r1.f1 / n};
    scores.rougeL = {s.rl.precision / n, s.rl.recall / n, s.rl.f1 / n};
    if (s.bert_count > 0) scores.bertscore_f1 = s.bert / static_cast<double>(s.bert_count);
    scores.bertscore_count = s.bert_count;
    out.emplace(key, scores);
  }
  return out;
}

double unanswerable_precision(std::span<const Prediction> predictions, const Corpus& corpus) {
  std::size_t refusals = 0;
  std::size_t correct = 0;
  for (const auto& p : predictions) {
    if (!is_refusal(p)) continue;
    const auto* instance = corpus.find(p.instance_id);
    if (!instance) throw Error(fmt::format("prediction for unknown instance '{}'", p.instance_id));
    ++refusals;
    if (!instance->answerable()) ++correct;
  }
  if (refusals == 0) {
    throw Error("unanswerable precision is undefined: no prediction is a refusal");
  }
  return static_cast<double>(correct) / static_cast<double>(refusals);
}

CalibrationReport calibration(std::span<const Prediction> predictions, const Corpus& corpus,
                              std::span<const double> edges) {
  if (edges.size() < 2) throw Error("calibration needs at least two bin edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw Error(fmt::format("calibration edges must be strictly increasing (edge {} = {} after {})",
                              i, edges[i], edges[i - 1]));
    }
  }

  CalibrationReport report;
  report.total = predictions.size();
  std::vector<double> f1_sums(edges.size() - 1, 0.0);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    report.bins.push_back({edges[i], edges[i + 1], 0, 0.0, std::nullopt});
  }
  for (const auto& p : predictions) {
    const auto& instance = scored_instance(corpus, p);
    const double c = p.confidence;
    if (c < edges.front()) {
      ++report.below_count;
      continue;
    }
    if (c > edges.back()) {
      ++report.above_count;
      continue;
    }
    // Last bin is closed on the right; all others are half-open.
    std::size_t bin = static_cast<std::size_t>(
        std::upper_bound(edges.begin(), edges.end(), c) - edges.begin()) - 1;
    bin = std::min(bin, report.bins.size() - 1);
    ++report.bins[bin].count;
    f1_sums[bin] += rouge1(p.answer_text, instance.gold_answer).f1;
  }

  const auto total = static_cast<double>(report.total);
  for (std::size_t i = 0; i < report.bins.size(); ++i) {
    auto& bin = report.bins[i];
    bin.fraction = report.total ? static_cast<double>(bin.count) / total : 0.0;
    if (bin.count > 0) bin.mean_rouge1_f1 = f1_sums[i] / static_cast<double>(bin.count);
  }
  report.below_fraction = report.total ? static_cast<double>(report.below_count) / total : 0.0;
  report.above_fraction = report.total ? static_cast<double>(report.above_count) / total : 0.0;
  return report;
}

}  // namespace figshot
