#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "figshot/backend.hpp"
#include "figshot/corpus.hpp"
#include "figshot/embeddings.hpp"
#include "figshot/prediction.hpp"
#include "figshot/run_cache.hpp"

namespace figshot {

/// Capped exponential backoff for RetryableError.
struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_delay{500};
  std::chrono::milliseconds max_delay{8000};
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleep_for
};

/// Sends one request, retrying transient failures. The completion must carry
/// a non-empty list of valid log-probabilities.
Completion run(Backend& backend, const CompletionRequest& request, const RetryPolicy& retry = {});

struct RunOptions {
  std::size_t concurrency = 1;
  /// Re-run pairs that are already cached.
  bool force = false;
  DecodeParams decode;
  RetryPolicy retry;
  std::function<std::string()> clock = utc_timestamp;
};

struct InstanceFailure {
  std::string instance_id;
  std::string message;
};

struct RunReport {
  std::string config_id;
  std::size_t requested = 0;
  std::size_t skipped_cached = 0;
  std::vector<Prediction> predictions;  // newly produced, in request order
  std::vector<InstanceFailure> failures;

  bool ok() const { return failures.empty(); }
};

nlohmann::json to_json(const RunReport& report);

/// For every instance: retrieve examples, render the prompt, query the
/// backend and append the prediction to `cache`. Cached pairs are skipped
/// unless forced. Per-instance failures are collected, not thrown. `store`
/// may be null for zero-shot configurations.
RunReport run_config(const Corpus& corpus, const EmbeddingStore* store, const RunConfig& config,
                     std::span<const std::string> instance_ids, RunCache& cache, Backend& backend,
                     const RunOptions& options = {});

}  // namespace figshot
