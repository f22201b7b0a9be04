#include "figshot/inference.hpp"

#include <algorithm>
#include <optional>
#include <thread>

#include <fmt/core.h>

#include "figshot/error.hpp"
#include "figshot/prompting.hpp"
#include "figshot/retrieval.hpp"

namespace figshot {

Completion run(Backend& backend, const CompletionRequest& request, const RetryPolicy& retry) {
  const int attempts = std::max(1, retry.max_attempts);
  auto delay = retry.initial_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      Completion completion = backend.complete(request);
      if (completion.token_logprobs.empty()) {
        throw Error(fmt::format("backend '{}' returned no token log-probabilities for '{}'",
                                backend.name(), request.instance_id));
      }
      confidence(completion.token_logprobs);  // validates the list
      return completion;
    } catch (const RetryableError& e) {
      if (attempt >= attempts) {
        throw Error(fmt::format("giving up on '{}' after {} attempts: {}", request.instance_id,
                                attempts, e.what()));
      }
      if (retry.sleep) {
        retry.sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
      delay = std::min(delay * 2, retry.max_delay);
    }
  }
}

nlohmann::json to_json(const RunReport& report) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"instance_id", f.instance_id}, {"message", f.message}});
  }
  return {{"config_id", report.config_id},
          {"requested", report.requested},
          {"skipped_cached", report.skipped_cached},
          {"completed", report.predictions.size()},
          {"failures", std::move(failures)}};
}

RunReport run_config(const Corpus& corpus, const EmbeddingStore* store, const RunConfig& config,
                     std::span<const std::string> instance_ids, RunCache& cache, Backend& backend,
                     const RunOptions& options) {
  validate(config.spec);
  if (config.spec.shots > 0 && store == nullptr) {
    throw Error(fmt::format("{} retrieves few-shot examples but no embeddings were provided",
                            config.id()));
  }
  static const EmbeddingStore empty_store;
  const EmbeddingStore& embeddings = store ? *store : empty_store;

  RunReport report;
  report.config_id = config.id();
  report.requested = instance_ids.size();

  std::vector<std::string> todo;
  for (const auto& id : instance_ids) {
    if (!options.force && cache.contains(id, report.config_id)) {
      ++report.skipped_cached;
    } else {
      todo.push_back(id);
    }
  }

  struct Outcome {
    std::optional<Prediction> prediction;
    std::string error;
  };
  const auto process = [&](const std::string& id) -> Outcome {
    try {
      const auto& query = corpus.get(id);
      const auto selection = select(corpus, embeddings, query, config.spec);
      CompletionRequest request{id, report.config_id, render_bundle(query, selection, corpus),
                                options.decode};
      auto completion = run(backend, request, options.retry);
      return {make_prediction(id, report.config_id, std::move(completion.text),
                              std::move(completion.token_logprobs), options.clock()),
              {}};
    } catch (const std::exception& e) {
      return {std::nullopt, e.what()};
    }
  };

  // Chunks are written in request order so the cache file is deterministic
  // and a crash loses at most one chunk.
  const std::size_t width = std::max<std::size_t>(1, options.concurrency);
  for (std::size_t start = 0; start < todo.size(); start += width) {
    const std::size_t end = std::min(todo.size(), start + width);
    std::vector<Outcome> outcomes(end - start);
    if (end - start == 1) {
      outcomes[0] = process(todo[start]);
    } else {
      std::vector<std::jthread> workers;
      for (std::size_t i = start; i < end; ++i) {
        workers.emplace_back([&, i] { outcomes[i - start] = process(todo[i]); });
      }
    }
    std::vector<Prediction> chunk;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (outcomes[i].prediction) {
        chunk.push_back(std::move(*outcomes[i].prediction));
      } else {
        report.failures.push_back({todo[start + i], std::move(outcomes[i].error)});
      }
    }
    cache.append(chunk);
    for (auto& p : chunk) report.predictions.push_back(std::move(p));
  }
  return report;
}

}  // namespace figshot
