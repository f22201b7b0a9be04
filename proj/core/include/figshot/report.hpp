#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "figshot/metrics.hpp"

namespace figshot {

nlohmann::json to_json(const ScoreTriple& scores);
nlohmann::json to_json(const std::map<std::string, SliceScores>& slices);
nlohmann::json to_json(const CalibrationReport& report);

/// Aligned plain-text tables; scores printed as percentages.
std::string format_table(const std::map<std::string, SliceScores>& slices, std::string_view title);
std::string format_table(const CalibrationReport& report);

/// JSON object {"instance_id": score, ...} produced by an external scorer.
BertScores load_bertscores(const std::filesystem::path& path);

}  // namespace figshot
