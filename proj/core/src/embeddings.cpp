#include "figshot/embeddings.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "figshot/corpus.hpp"
#include "figshot/error.hpp"
#include "figshot/jsonl.hpp"

namespace figshot {

std::string_view to_string(EmbeddingSpace space) {
  switch (space) {
    case EmbeddingSpace::Question: return "question";
    case EmbeddingSpace::Image: return "image";
    case EmbeddingSpace::Joint: return "joint";
  }
  return "unknown";
}

EmbeddingSpace parse_embedding_space(std::string_view text) {
  if (text == "question") return EmbeddingSpace::Question;
  if (text == "image") return EmbeddingSpace::Image;
  if (text == "joint") return EmbeddingSpace::Joint;
  throw Error(fmt::format("unknown embedding space '{}' (allowed: question, image, joint)", text));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(fmt::format("dimension mismatch: {} vs {}", a.size(), b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

Vector normalize(std::span<const double> v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw Error("cannot normalize a zero or non-finite vector");
  Vector out(v.begin(), v.end());
  for (auto& x : out) x /= n;
  return out;
}

Vector fuse(std::span<const double> question, std::span<const double> image) {
  if (question.size() != image.size()) {
    throw Error(fmt::format("fuse: dimension mismatch: {} vs {}", question.size(), image.size()));
  }
  Vector mean(question.size());
  for (std::size_t i = 0; i < mean.size(); ++i) mean[i] = (question[i] + image[i]) / 2.0;
  if (!(norm(mean) > 0.0)) throw Error("fuse: question and image vectors are antipodal");
  return normalize(mean);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw Error("cosine of a zero vector is undefined");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

void EmbeddingStore::add(EmbeddingRecord record) {
  if (record.vector.empty()) {
    throw Error(fmt::format("embedding for '{}' is empty", record.instance_id));
  }
  const double n = norm(record.vector);
  if (std::abs(n - 1.0) > kUnitNormTolerance) {
    throw Error(fmt::format("embedding for '{}' in space {} is not unit-norm (norm {})",
                            record.instance_id, to_string(record.space), n));
  }
  auto [it, created] = spaces_.try_emplace(record.space);
  auto& data = it->second;
  if (created) {
    data.dimension = record.vector.size();
  } else if (data.dimension != record.vector.size()) {
    throw Error(fmt::format("embedding for '{}' has dimension {}, space {} uses {}",
                            record.instance_id, record.vector.size(), to_string(record.space),
                            data.dimension));
  }
  if (data.vectors.contains(record.instance_id)) {
    throw Error(fmt::format("duplicate embedding for '{}' in space {}", record.instance_id,
                            to_string(record.space)));
  }
  data.vectors.emplace(std::move(record.instance_id), std::move(record.vector));
}

std::optional<std::size_t> EmbeddingStore::dimension(EmbeddingSpace space) const {
  const auto it = spaces_.find(space);
  if (it == spaces_.end()) return std::nullopt;
  return it->second.dimension;
}

std::size_t EmbeddingStore::size(EmbeddingSpace space) const {
  const auto it = spaces_.find(space);
  return it == spaces_.end() ? 0 : it->second.vectors.size();
}

const Vector* EmbeddingStore::find(EmbeddingSpace space, std::string_view instance_id) const {
  const auto it = spaces_.find(space);
  if (it == spaces_.end()) return nullptr;
  const auto vit = it->second.vectors.find(std::string(instance_id));
  return vit == it->second.vectors.end() ? nullptr : &vit->second;
}

const Vector& EmbeddingStore::get(EmbeddingSpace space, std::string_view instance_id) const {
  if (const auto* v = find(space, instance_id)) return *v;
  throw Error(fmt::format("missing {} embedding for instance '{}'", to_string(space), instance_id));
}

std::vector<EmbeddingRecord> EmbeddingStore::records() const {
  std::vector<EmbeddingRecord> out;
  for (const auto& [space, data] : spaces_) {
    std::vector<std::string> ids;
    ids.reserve(data.vectors.size());
    for (const auto& entry : data.vectors) ids.push_back(entry.first);
    std::sort(ids.begin(), ids.end());
    for (auto& id : ids) {
      const auto& vec = data.vectors.at(id);
      out.push_back({std::move(id), space, vec});
    }
  }
  return out;
}

void load_embeddings_into(EmbeddingStore& store, const std::filesystem::path& path) {
  jsonl::for_each(path, [&](const nlohmann::json& record, std::size_t line) {
    try {
      EmbeddingRecord parsed;
      parsed.instance_id = record.at("instance_id").get<std::string>();
      parsed.space = parse_embedding_space(record.at("space").get<std::string>());
      parsed.vector = record.at("vector").get<Vector>();
      store.add(std::move(parsed));
    } catch (const nlohmann::json::exception& e) {
      throw Error(fmt::format("{}:{}: bad embedding record: {}", path.string(), line, e.what()));
    } catch (const Error& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), line, e.what()));
    }
  });
}

EmbeddingStore load_embeddings(std::span<const std::filesystem::path> paths) {
  EmbeddingStore store;
  for (const auto& path : paths) load_embeddings_into(store, path);
  return store;
}

void write_embeddings(const std::filesystem::path& path,
                      std::span<const EmbeddingRecord> records) {
  std::vector<nlohmann::json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) {
    lines.push_back({{"instance_id", r.instance_id},
                     {"space", std::string(to_string(r.space))},
                     {"vector", r.vector}});
  }
  jsonl::write_all(path, lines);
}

std::vector<RankedCandidate> rank_candidates(std::span<const double> query,
                                             std::span<const RankInput> candidates) {
  struct Scored {
    double similarity;
    std::size_t order;
    std::string_view id;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) scored.push_back({cosine(query, c.vector), c.order, c.instance_id});
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.order < b.order;
  });
  std::vector<RankedCandidate> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back({std::string(s.id), s.similarity});
  return out;
}

std::vector<RankedCandidate> rank(const EmbeddingStore& store, EmbeddingSpace space,
                                  std::span<const double> query,
                                  std::span<const std::string> candidate_ids,
                                  const Corpus& corpus) {
  std::vector<RankInput> inputs;
  inputs.reserve(candidate_ids.size());
  for (const auto& id : candidate_ids) {
    const auto order = corpus.index_of(id);
    if (!order) throw Error(fmt::format("rank: candidate '{}' is not in the corpus", id));
    inputs.push_back({id, *order, store.get(space, id)});
  }
  return rank_candidates(query, inputs);
}

std::vector<RankedCandidate> rank(const EmbeddingStore& store, EmbeddingSpace space,
                                  std::string_view query_id,
                                  std::span<const std::string> candidate_ids,
                                  const Corpus& corpus) {
  return rank(store, space, std::span<const double>(store.get(space, query_id)), candidate_ids,
              corpus);
}

}  // namespace figshot
