#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "figshot/prediction.hpp"

namespace figshot {

/// Read-only collection of predictions keyed by (instance_id, config_id).
/// A later record for the same key replaces an earlier one.
class PredictionSet {
 public:
  void add(Prediction prediction);

  bool contains(std::string_view instance_id, std::string_view config_id) const;
  const Prediction* find(std::string_view instance_id, std::string_view config_id) const;
  /// Throws figshot::Error naming the missing (instance, config) pair.
  const Prediction& get(std::string_view instance_id, std::string_view config_id) const;

  std::size_t size() const { return entries_.size(); }
  std::vector<std::string> config_ids() const;
  /// Predictions of one configuration, sorted by instance id.
  std::vector<Prediction> for_config(std::string_view config_id) const;

  /// Loads every *.jsonl cache file of `dir` (sorted by file name).
  static PredictionSet load_directory(const std::filesystem::path& dir);
  static PredictionSet load_file(const std::filesystem::path& path);

 private:
  std::map<std::pair<std::string, std::string>, Prediction, std::less<>> entries_;
};

/// Cache file name for a configuration id ("pixtral:2s_q_f" -> "pixtral__2s_q_f.jsonl").
std::string cache_file_name(std::string_view config_id);

/// Append-only JSONL store of predictions backing one or more configurations.
/// Appends are serialized and flushed line by line.
class RunCache {
 public:
  /// Loads the file when it exists; an empty path keeps the cache in memory.
  explicit RunCache(std::filesystem::path path = {});

  RunCache(const RunCache&) = delete;
  RunCache& operator=(const RunCache&) = delete;

  const std::filesystem::path& path() const { return path_; }

  bool contains(std::string_view instance_id, std::string_view config_id) const;
  const Prediction* find(std::string_view instance_id, std::string_view config_id) const;
  std::size_t size() const;

  void append(const Prediction& prediction);
  void append(std::span<const Prediction> predictions);

  PredictionSet snapshot() const;

 private:
  std::filesystem::path path_;
  PredictionSet entries_;
  mutable std::mutex mutex_;
};

}  // namespace figshot
