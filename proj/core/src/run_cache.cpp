#include "figshot/run_cache.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/core.h>

#include "figshot/error.hpp"
#include "figshot/jsonl.hpp"

namespace figshot {

void PredictionSet::add(Prediction prediction) {
  auto key = std::make_pair(prediction.instance_id, prediction.config_id);
  entries_.insert_or_assign(std::move(key), std::move(prediction));
}

const Prediction* PredictionSet::find(std::string_view instance_id,
                                      std::string_view config_id) const {
  const auto it = entries_.find(std::make_pair(std::string(instance_id), std::string(config_id)));
  return it == entries_.end() ? nullptr : &it->second;
}

bool PredictionSet::contains(std::string_view instance_id, std::string_view config_id) const {
  return find(instance_id, config_id) != nullptr;
}

const Prediction& PredictionSet::get(std::string_view instance_id,
                                     std::string_view config_id) const {
  if (const auto* p = find(instance_id, config_id)) return *p;
  throw Error(fmt::format("no cached prediction for instance '{}' under {}", instance_id,
                          config_id));
}

std::vector<std::string> PredictionSet::config_ids() const {
  std::set<std::string> ids;
  for (const auto& entry : entries_) ids.insert(entry.first.second);
  return {ids.begin(), ids.end()};
}

std::vector<Prediction> PredictionSet::for_config(std::string_view config_id) const {
  std::vector<Prediction> out;
  for (const auto& [key, p] : entries_) {
    if (key.second == config_id) out.push_back(p);
  }
  return out;
}

PredictionSet PredictionSet::load_file(const std::filesystem::path& path) {
  PredictionSet set;
  jsonl::for_each(path, [&](const nlohmann::json& record, std::size_t line) {
    try {
      set.add(prediction_from_json(record));
    } catch (const Error& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), line, e.what()));
    }
  });
  return set;
}

PredictionSet PredictionSet::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(fmt::format("cache directory '{}' does not exist", dir.string()));
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  PredictionSet set;
  for (const auto& file : files) {
    auto part = load_file(file);
    for (auto& [key, p] : part.entries_) set.add(std::move(p));
  }
  return set;
}

std::string cache_file_name(std::string_view config_id) {
  std::string out;
  for (const char c : config_id) {
    if (c == ':') {
      out += "__";
    } else if (c == '/' || c == '\\') {
      out += '_';
    } else {
      out += c;
    }
  }
  return out + ".jsonl";
}

RunCache::RunCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!path_.empty() && std::filesystem::exists(path_)) entries_ = PredictionSet::load_file(path_);
}

bool RunCache::contains(std::string_view instance_id, std::string_view config_id) const {
  std::lock_guard lock(mutex_);
  return entries_.contains(instance_id, config_id);
}

const Prediction* RunCache::find(std::string_view instance_id, std::string_view config_id) const {
  std::lock_guard lock(mutex_);
  return entries_.find(instance_id, config_id);
}

std::size_t RunCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void RunCache::append(const Prediction& prediction) {
  append(std::span<const Prediction>(&prediction, 1));
}

void RunCache::append(std::span<const Prediction> predictions) {
  std::lock_guard lock(mutex_);
  if (!path_.empty()) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw Error(fmt::format("cannot append to cache '{}'", path_.string()));
    for (const auto& p : predictions) out << jsonl::dump_line(to_json(p));
    out.flush();
    if (!out) throw Error(fmt::format("write failed for cache '{}'", path_.string()));
  }
  for (const auto& p : predictions) entries_.add(p);
}

PredictionSet RunCache::snapshot() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

}  // namespace figshot
