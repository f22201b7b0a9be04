#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "figshot/corpus.hpp"
#include "figshot/embeddings.hpp"

namespace figshot {

struct EmbedClientOptions {
  /// Items per POST /embed request.
  std::size_t batch_size = 32;
  /// Requests in flight at once.
  std::size_t concurrency = 4;
  std::chrono::seconds timeout{120};
  /// When set, every returned vector must have this dimension.
  std::optional<std::size_t> expected_dimension;
};

/// Requests embeddings for `instances` in `space` from an embedding service at
/// `endpoint` (e.g. "http://localhost:8090"). Records come back in instance
/// order, normalized on receipt. Transport failures and 429/5xx replies raise
/// RetryableError; malformed replies raise Error.
std::vector<EmbeddingRecord> fetch_embeddings(const std::string& endpoint,
                                              std::span<const Instance> instances,
                                              EmbeddingSpace space,
                                              const EmbedClientOptions& options = {});

}  // namespace figshot
