#include "figshot/score_matrix.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include <fmt/core.h>

#include "figshot/error.hpp"
#include "figshot/jsonl.hpp"
#include "figshot/metrics.hpp"

namespace figshot {

namespace {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (quoted) throw Error(fmt::format("line {}: unterminated quoted field", line_no));
  fields.push_back(std::move(current));
  return fields;
}

}  // namespace

ScoreMatrix::ScoreMatrix(std::vector<std::string> rows, std::vector<std::string> cols,
                         std::vector<double> values)
    : rows_(std::move(rows)), cols_(std::move(cols)), values_(std::move(values)) {
  if (values_.size() != rows_.size() * cols_.size()) {
    throw Error(fmt::format("score matrix: {} values for {} x {} cells", values_.size(),
                            rows_.size(), cols_.size()));
  }
  const std::set<std::string> unique_cols(cols_.begin(), cols_.end());
  if (unique_cols.size() != cols_.size()) throw Error("score matrix: duplicate configuration column");
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (!row_index_.emplace(rows_[r], r).second) {
      throw Error(fmt::format("score matrix: duplicate row '{}'", rows_[r]));
    }
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      const double v = at(r, c);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(fmt::format("score matrix: value {} for ({}, {}) is outside [0, 1]", v,
                                rows_[r], cols_[c]));
      }
    }
  }
}

std::optional<std::size_t> ScoreMatrix::row_index(std::string_view instance_id) const {
  const auto it = row_index_.find(std::string(instance_id));
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

ScoreMatrix ScoreMatrix::read_csv(const std::filesystem::path& path) {
  const auto text = jsonl::read_text(path);
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<double> values;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header = true;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    try {
      auto fields = split_csv_line(line, line_no);
      if (header) {
        if (fields.empty() || fields.front() != "instance_id") {
          throw Error("header must start with 'instance_id'");
        }
        cols.assign(fields.begin() + 1, fields.end());
        header = false;
        continue;
      }
      if (fields.size() != cols.size() + 1) {
        throw Error(fmt::format("expected {} fields, got {}", cols.size() + 1, fields.size()));
      }
      rows.push_back(fields.front());
      for (std::size_t i = 1; i < fields.size(); ++i) {
        double v = 0.0;
        const auto& f = fields[i];
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc() || ptr != f.data() + f.size()) {
          throw Error(fmt::format("'{}' is not a number", f));
        }
        values.push_back(v);
      }
    } catch (const Error& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  if (header) throw Error(fmt::format("{}: empty score matrix", path.string()));
  return ScoreMatrix(std::move(rows), std::move(cols), std::move(values));
}

std::string ScoreMatrix::to_csv() const {
  std::string out = "instance_id";
  for (const auto& c : cols_) out += "," + csv_field(c);
  out += "\n";
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    out += csv_field(rows_[r]);
    for (std::size_t c = 0; c < cols_.size(); ++c) out += fmt::format(",{}", at(r, c));
    out += "\n";
  }
  return out;
}

void ScoreMatrix::write_csv(const std::filesystem::path& path) const {
  jsonl::write_text(path, to_csv());
}

ScoreMatrix ScoreMatrix::from_predictions(const PredictionSet& predictions, const Corpus& corpus,
                                          std::span<const std::string> instance_ids,
                                          std::span<const std::string> config_ids) {
  std::vector<double> values;
  values.reserve(instance_ids.size() * config_ids.size());
  for (const auto& id : instance_ids) {
    const auto& instance = corpus.get(id);
    if (instance.gold_answer.empty()) {
      throw Error(fmt::format("instance '{}' has no gold answer", id));
    }
    for (const auto& config : config_ids) {
      values.push_back(rouge1(predictions.get(id, config).answer_text, instance.gold_answer).f1);
    }
  }
  return ScoreMatrix({instance_ids.begin(), instance_ids.end()},
                     {config_ids.begin(), config_ids.end()}, std::move(values));
}

}  // namespace figshot
