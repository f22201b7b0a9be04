#include "figshot/embed_client.hpp"

#include <algorithm>
#include <future>

#include <fmt/core.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "figshot/error.hpp"
#include "figshot/image.hpp"
#include "http_util.hpp"

namespace figshot {

namespace {

nlohmann::json make_item(const Instance& instance, EmbeddingSpace space) {
  nlohmann::json item = {{"instance_id", instance.instance_id}};
  if (space == EmbeddingSpace::Question || space == EmbeddingSpace::Joint) {
    item["text"] = instance.question;
  }
  if (space == EmbeddingSpace::Image || space == EmbeddingSpace::Joint) {
    if (instance.image_path.empty()) {
      throw Error(fmt::format("instance '{}' has no image_path", instance.instance_id));
    }
    item["image_base64"] = read_image_base64(instance.image_path);
  }
  return item;
}

std::vector<EmbeddingRecord> post_batch(const detail::ParsedUrl& url,
                                        std::span<const Instance> batch, EmbeddingSpace space,
                                        const EmbedClientOptions& options) {
  nlohmann::json request = {{"space", std::string(to_string(space))},
                            {"items", nlohmann::json::array()}};
  for (const auto& instance : batch) request["items"].push_back(make_item(instance, space));

  httplib::Client client(url.origin);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_write_timeout(options.timeout);
  const auto result = client.Post(url.path + "/embed", request.dump(), "application/json");
  if (!result) {
    throw RetryableError(fmt::format("embedding service at {} unreachable: {}", url.origin,
                                     httplib::to_string(result.error())));
  }
  if (detail::is_transient_status(result->status)) {
    throw RetryableError(fmt::format("embedding service returned HTTP {}", result->status));
  }
  if (result->status != 200) {
    throw Error(fmt::format("embedding service returned HTTP {}: {}", result->status,
                            result->body));
  }

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(fmt::format("embedding service reply is not JSON: {}", e.what()));
  }
  std::vector<EmbeddingRecord> out;
  out.reserve(batch.size());
  try {
    const auto& vectors = reply.at("vectors");
    if (!vectors.is_array() || vectors.size() != batch.size()) {
      throw Error(fmt::format("embedding service returned {} vectors for {} items",
                              vectors.is_array() ? vectors.size() : 0, batch.size()));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto id = vectors[i].at("instance_id").get<std::string>();
      if (id != batch[i].instance_id) {
        throw Error(fmt::format("embedding service reordered items: expected '{}', got '{}'",
                                batch[i].instance_id, id));
      }
      out.push_back({id, space, normalize(vectors[i].at("vector").get<Vector>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("malformed embedding service reply: {}", e.what()));
  }
  return out;
}

}  // namespace

std::vector<EmbeddingRecord> fetch_embeddings(const std::string& endpoint,
                                              std::span<const Instance> instances,
                                              EmbeddingSpace space,
                                              const EmbedClientOptions& options) {
  if (instances.empty()) return {};
  const auto url = detail::parse_url(endpoint);
  const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);
  const std::size_t in_flight = std::max<std::size_t>(1, options.concurrency);

  std::vector<std::span<const Instance>> batches;
  for (std::size_t start = 0; start < instances.size(); start += batch_size) {
    batches.push_back(instances.subspan(start, std::min(batch_size, instances.size() - start)));
  }

  std::vector<EmbeddingRecord> records;
  records.reserve(instances.size());
  for (std::size_t wave = 0; wave < batches.size(); wave += in_flight) {
    std::vector<std::future<std::vector<EmbeddingRecord>>> pending;
    for (std::size_t b = wave; b < std::min(batches.size(), wave + in_flight); ++b) {
      pending.push_back(std::async(std::launch::async, post_batch, std::cref(url), batches[b],
                                   space, std::cref(options)));
    }
    for (auto& f : pending) {
      for (auto& record : f.get()) records.push_back(std::move(record));
    }
  }

  const std::size_t dimension = options.expected_dimension.value_or(records.front().vector.size());
  for (const auto& record : records) {
    if (record.vector.size() != dimension) {
      throw Error(fmt::format("embedding for '{}' has dimension {}, expected {}",
                              record.instance_id, record.vector.size(), dimension));
    }
  }
  return records;
}

}  // namespace figshot
