#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "figshot/corpus.hpp"
#include "figshot/prediction.hpp"

namespace figshot {

struct ScoreTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  /// f1 = 2PR / (P + R), or 0 when P + R = 0.
  static ScoreTriple from_precision_recall(double precision, double recall);

  friend bool operator==(const ScoreTriple&, const ScoreTriple&) = default;
};

/// Lowercased ASCII; any non-alphanumeric ASCII byte separates tokens. Bytes
/// >= 0x80 count as word characters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

/// Clipped unigram overlap. Both sides empty scores (1,1,1); one side empty
/// scores (0,0,0).
ScoreTriple rouge1(std::string_view candidate, std::string_view reference);

/// Longest common subsequence over tokens, same empty-side conventions.
ScoreTriple rougeL(std::string_view candidate, std::string_view reference);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

enum class SliceBy { None, QuestionType, FigureType, Both };
SliceBy parse_slice_by(std::string_view text);

struct SliceScores {
  std::size_t count = 0;
  ScoreTriple rouge1;  // unweighted means
  ScoreTriple rougeL;
  std::optional<double> bertscore_f1;  // mean over instances with an imported score
  std::size_t bertscore_count = 0;
};

/// Optional externally computed BERTScore F1 per instance.
using BertScores = std::map<std::string, double>;

/// Mean ROUGE scores per slice. Slice keys: "all", a question type, a figure
/// type, or "<figure type>|<question type>". Empty slices are omitted.
std::map<std::string, SliceScores> aggregate(std::span<const Prediction> predictions,
                                             const Corpus& corpus, SliceBy slice_by,
                                             const BertScores* bertscores = nullptr);

/// Share of refusal answers whose gold question type is unanswerable. Throws
/// when no prediction is a refusal.
double unanswerable_precision(std::span<const Prediction> predictions, const Corpus& corpus);

inline const std::vector<double> kDefaultCalibrationEdges = {0.3, 0.4, 0.5, 0.6,
                                                             0.7, 0.8, 0.9, 1.0};

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double fraction = 0.0;                 // of all predictions
  std::optional<double> mean_rouge1_f1;  // empty bin: no value
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  std::size_t total = 0;
  std::size_t below_count = 0;
  double below_fraction = 0.0;
  std::size_t above_count = 0;
  double above_fraction = 0.0;
};

/// Bins are [lower, upper) except the last, which is closed. Edges must be
/// strictly increasing with at least two entries.
CalibrationReport calibration(std::span<const Prediction> predictions, const Corpus& corpus,
                              std::span<const double> edges = kDefaultCalibrationEdges);

}  // namespace figshot
