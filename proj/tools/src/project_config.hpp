#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "figshot/backend.hpp"
#include "figshot/inference.hpp"
#include "figshot/retrieval.hpp"

namespace figshot::cli {

/// Project file shared by every command. Relative paths resolve against the
/// directory holding the file.
struct ProjectConfig {
  std::filesystem::path source;
  std::vector<std::filesystem::path> corpus;
  std::optional<std::vector<std::string>> figure_types;
  std::map<RetrievalSpace, std::vector<std::filesystem::path>> embeddings;
  BackendRegistry backends;
  std::filesystem::path cache_dir;
  std::map<std::string, std::filesystem::path> plans;
  DecodeParams decode;
  std::size_t concurrency = 4;
  int retry_attempts = 4;
  std::chrono::milliseconds retry_initial_delay{500};
  std::chrono::milliseconds retry_max_delay{8000};
  std::string embed_service;

  /// Throws figshot::Error on unknown keys, bad values or missing files.
  static ProjectConfig from_json(const nlohmann::json& config, const std::filesystem::path& base_dir);
  static ProjectConfig load(const std::filesystem::path& path);

  RetryPolicy retry_policy() const;
};

RetrievalSpace parse_retrieval_space(std::string_view text);
std::string_view config_key(RetrievalSpace space);

}  // namespace figshot::cli
