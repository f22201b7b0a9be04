#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "figshot/corpus.hpp"
#include "figshot/run_cache.hpp"

namespace figshot {

/// Dense instance x configuration table of ROUGE-1 F1 scores in [0, 1].
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  /// `values` is row-major, rows.size() * cols.size() long.
  ScoreMatrix(std::vector<std::string> rows, std::vector<std::string> cols,
              std::vector<double> values);

  const std::vector<std::string>& rows() const { return rows_; }
  const std::vector<std::string>& cols() const { return cols_; }
  double at(std::size_t row, std::size_t col) const { return values_[row * cols_.size() + col]; }
  std::optional<std::size_t> row_index(std::string_view instance_id) const;

  /// Header "instance_id,<config>,..." then one row per instance.
  static ScoreMatrix read_csv(const std::filesystem::path& path);
  void write_csv(const std::filesystem::path& path) const;
  std::string to_csv() const;

  /// ROUGE-1 F1 of every cached (instance, config) pair. Missing cells throw.
  static ScoreMatrix from_predictions(const PredictionSet& predictions, const Corpus& corpus,
                                      std::span<const std::string> instance_ids,
                                      std::span<const std::string> config_ids);

 private:
  std::vector<std::string> rows_;
  std::vector<std::string> cols_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> row_index_;
};

}  // namespace figshot
